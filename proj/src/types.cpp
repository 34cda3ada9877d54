#include "nilm/types.hpp"

#include <cmath>
#include <limits>

namespace nilm {

const std::string EventLabel::kUnknownId = "unknown";

SeriesCheck validate_series(const SampledSeries& s) {
    if (!(s.step > 0.0)) return {SeriesDefect::NonPositiveStep, -1};
    if (s.values.size() == 0) return {SeriesDefect::EmptySeries, -1};
    for (Index i = 0; i < s.values.size(); ++i) {
        if (!std::isfinite(s.values[i])) return {SeriesDefect::NonFinite, i};
        if (s.values[i] < 0.0) return {SeriesDefect::NegativeValue, i};
    }
    return {};
}

void require_valid(const SampledSeries& s, const std::string& context) {
    const SeriesCheck c = validate_series(s);
    switch (c.defect) {
        case SeriesDefect::None:
            return;
        case SeriesDefect::NonPositiveStep:
            throw NilmError("NonPositiveStep: " + context);
        case SeriesDefect::EmptySeries:
            throw NilmError("EmptySeries: " + context);
        case SeriesDefect::NonFinite:
            throw NilmError("NonFinite: sample " + std::to_string(c.index) + " in " + context);
        case SeriesDefect::NegativeValue:
            throw NilmError("NegativeValue: sample " + std::to_string(c.index) + " in " + context);
    }
}

ArrayXd EventSignal::to_dense() const {
    ArrayXd dense = ArrayXd::Zero(domain_len);
    for (const auto& e : events) {
        if (e.t < 0 || e.t >= domain_len)
            throw NilmError("EventOutOfDomain: index " + std::to_string(e.t));
        dense[e.t] = e.delta;
    }
    return dense;
}

EventSignal EventSignal::from_dense(const ArrayXd& dense) {
    EventSignal sig;
    sig.domain_len = dense.size();
    for (Index t = 0; t < dense.size(); ++t) {
        if (dense[t] != 0.0) sig.events.push_back({t, dense[t]});
    }
    return sig;
}

const ApplianceMode* ApplianceSpec::find_mode(int index) const {
    for (const auto& m : modes) {
        if (m.index == index) return &m;
    }
    return nullptr;
}

int ApplianceSpec::mode_for_level(double level) const {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& m : modes) {
        if (level >= m.power_low && level <= m.power_high) return m.index;
        const double mid = 0.5 * (m.power_low + m.power_high);
        const double d = std::abs(level - mid);
        if (d < best_dist) {
            best_dist = d;
            best = m.index;
        }
    }
    return best;
}

void ApplianceSpec::validate() const {
    if (id.empty()) throw NilmError("InvalidSpec: empty appliance id");
    if (modes.empty() || modes.front().index != 0 || modes.front().power_low != 0.0 ||
        modes.front().power_high != 0.0)
        throw NilmError("InvalidSpec: " + id + " must list mode 0 as OFF(0,0) first");
    for (const auto& m : modes) {
        if (m.power_low > m.power_high)
            throw NilmError("InvalidSpec: " + id + " mode " + std::to_string(m.index) +
                            " has power_low > power_high");
        if (m.power_low < 0.0)
            throw NilmError("InvalidSpec: " + id + " mode " + std::to_string(m.index) +
                            " has negative power");
    }
    for (const auto& w : water_program) {
        if (w.offset_min < 0.0 || w.duration_min <= 0.0 || w.flow <= 0.0)
            throw NilmError("InvalidSpec: " + id + " has a malformed water segment");
    }
}

void LabeledEventSet::check_consistent() const {
    if (features.rows() != static_cast<Index>(labels.size()))
        throw NilmError("LabelMismatch: " + std::to_string(features.rows()) + " feature rows vs " +
                        std::to_string(labels.size()) + " labels");
    if (!event_times.empty() && features.rows() != static_cast<Index>(event_times.size()))
        throw NilmError("LabelMismatch: feature rows vs event_times");
}

}  // namespace nilm
