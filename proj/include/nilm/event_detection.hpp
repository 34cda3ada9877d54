#pragma once

#include "nilm/types.hpp"

namespace nilm {

/**
 * Detector settings. sigma_g is the standard deviation of the grid noise:
 * it gates the steady-state filter and doubles as the event threshold.
 * The local window is fixed at 3 samples.
 */
struct DetectorConfig {
    double sigma_g = 15.0;
    static constexpr int kWindow = 3;

    void validate() const {
        if (!(sigma_g > 0.0)) throw NilmError("InvalidConfig: sigma_g must be > 0");
    }
};

/// Piecewise-constant steady-state signal aligned to its input domain.
struct FilteredSeries {
    std::int64_t start_time = 0;
    double step = 60.0;
    ArrayXd values;

    Index size() const { return values.size(); }
    SampledSeries as_series(SignalKind kind = SignalKind::Power) const {
        return {start_time, step, values, kind};
    }
};

/**
 * 3-sample trailing moving average. For the first two samples the mean of
 * the available prefix is used. Requires at least 3 samples.
 */
SampledSeries smooth_sma(const SampledSeries& s);

/// Trailing 3-sample standard deviation of s against its own moving
/// average (the filter's gate statistic). sigma[0] = 0, sigma[1] over the
/// 2-sample prefix.
ArrayXd rolling_sigma(const SampledSeries& s);

/**
 * Steady-state filter: tracks the moving average while the local standard
 * deviation stays below sigma_g, holds the previous value otherwise.
 * Requires at least 4 samples.
 */
FilteredSeries filter_steady(const SampledSeries& s, const DetectorConfig& cfg);

/**
 * Emits an event wherever the filtered signal jumps by at least sigma_g
 * in one sample, keeping the sign of the change. Warm-up samples
 * (t < window) never emit.
 */
EventSignal detect_events(const FilteredSeries& f, const DetectorConfig& cfg);

/**
 * Data-driven sigma_g fallback for when the grid noise level is unknown.
 * Takes the rolling 3-sample standard deviations, keeps the quiet_fraction
 * lowest, and returns their median rescaled to an unbiased noise-sigma
 * estimate, multiplied by safety_factor. Returns 0 for a noiseless input
 * (DetectorConfig then rejects it, forcing an explicit choice).
 * Requires at least 100 samples.
 */
double estimate_sigma_g(const SampledSeries& s, double quiet_fraction = 0.5,
                        double safety_factor = 3.0);

}  // namespace nilm
