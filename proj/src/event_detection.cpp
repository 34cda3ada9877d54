#include "nilm/event_detection.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nilm {

namespace {
void require_length(const SampledSeries& s, Index min_len, const char* op) {
    require_valid(s, op);
    if (s.size() < min_len)
        throw NilmError(std::string("TooShort: ") + op + " needs >= " + std::to_string(min_len) +
                        " samples, got " + std::to_string(s.size()));
}
}  // namespace

SampledSeries smooth_sma(const SampledSeries& s) {
    require_length(s, 3, "smooth_sma");
    const Index n = s.size();
    ArrayXd out(n);
    out[0] = s.values[0];
    out[1] = 0.5 * (s.values[0] + s.values[1]);
    for (Index t = 2; t < n; ++t)
        out[t] = (s.values[t] + s.values[t - 1] + s.values[t - 2]) / 3.0;
    return {s.start_time, s.step, out, s.kind};
}

ArrayXd rolling_sigma(const SampledSeries& s) {
    const Index n = s.size();
    ArrayXd sigma = ArrayXd::Zero(n);
    if (n > 1) {
        const double mean1 = 0.5 * (s.values[0] + s.values[1]);
        double acc = 0.0;
        for (Index i = 0; i < 2; ++i) acc += (s.values[i] - mean1) * (s.values[i] - mean1);
        sigma[1] = std::sqrt(acc / 2.0);
    }
    for (Index t = 2; t < n; ++t) {
        const double mean = (s.values[t] + s.values[t - 1] + s.values[t - 2]) / 3.0;
        double acc = 0.0;
        for (Index i = t - 2; i <= t; ++i) acc += (s.values[i] - mean) * (s.values[i] - mean);
        sigma[t] = std::sqrt(acc / 3.0);
    }
    return sigma;
}

FilteredSeries filter_steady(const SampledSeries& s, const DetectorConfig& cfg) {
    cfg.validate();
    require_length(s, 4, "filter_steady");
    const SampledSeries sma = smooth_sma(s);
    const ArrayXd sigma = rolling_sigma(s);
    const Index n = s.size();
    ArrayXd out(n);
    out[0] = s.values[0];
    for (Index t = 1; t < n; ++t)
        out[t] = sigma[t] < cfg.sigma_g ? sma.values[t] : out[t - 1];
    return {s.start_time, s.step, out};
}

EventSignal detect_events(const FilteredSeries& f, const DetectorConfig& cfg) {
    cfg.validate();
    EventSignal sig;
    sig.domain_len = f.size();
    // warm-up: indices before the first full smoothing window never emit
    for (Index t = DetectorConfig::kWindow - 1; t < f.size(); ++t) {
        const double delta = f.values[t] - f.values[t - 1];
        if (std::abs(delta) >= cfg.sigma_g) sig.events.push_back({t, delta});
    }
    return sig;
}

double estimate_sigma_g(const SampledSeries& s, double quiet_fraction, double safety_factor) {
    require_length(s, 100, "estimate_sigma_g");
    if (!(quiet_fraction > 0.0) || quiet_fraction > 1.0)
        throw NilmError("InvalidConfig: quiet_fraction must be in (0, 1]");

    const ArrayXd sigma = rolling_sigma(s);
    std::vector<double> windows(sigma.data() + 2, sigma.data() + sigma.size());
    std::sort(windows.begin(), windows.end());
    const std::size_t kept = std::max<std::size_t>(
        1, static_cast<std::size_t>(quiet_fraction * static_cast<double>(windows.size())));
    const double median = kept % 2 == 1 ? windows[kept / 2]
                                        : 0.5 * (windows[kept / 2 - 1] + windows[kept / 2]);

    // For 3 Gaussian samples, sigma^2 = (noise^2/3) * chi2_2, so the median
    // of the kept (lowest quiet_fraction) windows sits at the chi2_2
    // quantile -2*ln(1 - q/2). Dividing by sqrt of that over 3 makes the
    // estimate unbiased for pure noise.
    const double quantile = -2.0 * std::log(1.0 - 0.5 * quiet_fraction);
    const double correction = std::sqrt(quantile / 3.0);
    return safety_factor * median / correction;
}

}  // namespace nilm
