#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

using ArrayXd = Eigen::ArrayXd;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using Index = Eigen::Index;

/// Error raised by library operations on contract violations. The message
/// starts with a short machine-checkable code (e.g. "TooShort: ...").
class NilmError : public std::runtime_error {
public:
    explicit NilmError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class SignalKind { Power, Water };

inline const char* to_string(SignalKind k) {
    return k == SignalKind::Power ? "power" : "water";
}

/**
 * Uniformly sampled measurement series, the universal signal carrier.
 * Power values are watts, water values are volume per minute. Immutable
 * by convention once constructed.
 */
struct SampledSeries {
    std::int64_t start_time = 0;  // epoch seconds of values[0]
    double step = 60.0;           // seconds per sample
    ArrayXd values;
    SignalKind kind = SignalKind::Power;

    Index size() const { return values.size(); }
    std::int64_t time_at(Index t) const {
        return start_time + static_cast<std::int64_t>(t * step);
    }
};

enum class SeriesDefect { None, EmptySeries, NonFinite, NegativeValue, NonPositiveStep };

struct SeriesCheck {
    SeriesDefect defect = SeriesDefect::None;
    Index index = -1;  // offending sample for NonFinite / NegativeValue

    bool ok() const { return defect == SeriesDefect::None; }
};

/// Validates the SampledSeries invariants (step > 0, non-empty, finite,
/// non-negative). Returns the first defect found.
SeriesCheck validate_series(const SampledSeries& s);

/// Throwing variant used by operations that require a valid input.
void require_valid(const SampledSeries& s, const std::string& context);

struct PowerEvent {
    Index t = 0;         // sample index in the parent domain
    double delta = 0.0;  // signed step change in watts
};

/**
 * Sparse sequence of step-change events aligned to a sampled domain.
 * Indices are strictly increasing in [1, domain_len). Dense rendering is
 * zero except at event indices, where it equals the signed delta.
 */
struct EventSignal {
    Index domain_len = 0;
    std::vector<PowerEvent> events;

    ArrayXd to_dense() const;
    static EventSignal from_dense(const ArrayXd& dense);
};

struct ApplianceMode {
    int index = 0;  // 0 is OFF; non-OFF modes keep their catalogue numbering
    double power_low = 0.0;
    double power_high = 0.0;
};

struct WaterSegment {
    double offset_min = 0.0;    // minutes from cycle start
    double duration_min = 0.0;  // minutes of flow
    double flow = 0.0;          // volume per minute
};

/**
 * Static description of one appliance: its operating modes with power
 * bands and, for appliances that draw water, the within-cycle water
 * program time-locked to the power cycle.
 */
struct ApplianceSpec {
    std::string id;
    std::vector<ApplianceMode> modes;          // mode 0 (OFF) first
    std::vector<WaterSegment> water_program;   // empty when no water draw

    bool draws_water() const { return !water_program.empty(); }
    const ApplianceMode* find_mode(int index) const;

    /// Mode whose band contains `level`; falls back to the mode with the
    /// nearest band midpoint. OFF wins for levels below half the lowest band.
    int mode_for_level(double level) const;

    /// Throws InvalidSpec unless mode 0 is OFF(0,0) and every band has
    /// power_low <= power_high.
    void validate() const;
};

/// Transition ids are (from_mode, to_mode) flattened as from*kModeBase+to.
inline constexpr int kModeBase = 16;

inline int encode_transition(int from_mode, int to_mode) {
    return from_mode * kModeBase + to_mode;
}
inline std::pair<int, int> decode_transition(int transition_id) {
    return {transition_id / kModeBase, transition_id % kModeBase};
}

/// Label attached to one detected event: which appliance caused it and
/// which mode transition. Unlabeled events carry the UNKNOWN id.
struct EventLabel {
    std::string appliance_id;
    int from_mode = 0;
    int to_mode = 0;

    int transition_id() const { return encode_transition(from_mode, to_mode); }

    static const std::string kUnknownId;
    static EventLabel unknown() { return {kUnknownId, 0, 0}; }
    bool is_unknown() const { return appliance_id == kUnknownId; }

    friend bool operator==(const EventLabel& a, const EventLabel& b) {
        return a.appliance_id == b.appliance_id && a.from_mode == b.from_mode &&
               a.to_mode == b.to_mode;
    }
    friend bool operator<(const EventLabel& a, const EventLabel& b) {
        if (a.appliance_id != b.appliance_id) return a.appliance_id < b.appliance_id;
        if (a.from_mode != b.from_mode) return a.from_mode < b.from_mode;
        return a.to_mode < b.to_mode;
    }
};

/**
 * Events paired with labels, the classifier training currency. Feature
 * rows and labels are index-aligned; all rows share one feature layout
 * (signed delta watts, pre-event steady level watts).
 */
struct LabeledEventSet {
    MatrixXd features;               // one row per event
    std::vector<EventLabel> labels;
    std::vector<Index> event_times;  // sample index of each event
    std::string provenance;

    Index size() const { return features.rows(); }
    void check_consistent() const;
};

/// Per-sample binary activity labels aligned to a sampled domain.
struct WaterLabelSeries {
    std::int64_t start_time = 0;
    double step = 60.0;
    std::vector<std::uint8_t> labels;

    Index size() const { return static_cast<Index>(labels.size()); }
};

}  // namespace nilm
