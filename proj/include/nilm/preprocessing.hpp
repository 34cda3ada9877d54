#pragma once

#include "nilm/data_io.hpp"
#include "nilm/event_detection.hpp"
#include "nilm/types.hpp"

#include <cstdint>
#include <vector>

namespace nilm {

/// Full detector composition: smooth, steady-state filter, thresholded
/// differencing. The dense rendering of the result is zero except at
/// events, where it carries the signed step change.
EventSignal build_event_signal(const SampledSeries& s, const DetectorConfig& cfg);

/// Per-event classifier features: (signed delta watts, pre-event steady
/// level watts). The pre-event level is the filtered signal one sample
/// before the event.
MatrixXd event_features(const EventSignal& events, const FilteredSeries& filtered);

struct MatchConfig {
    Index match_window = 2;  // samples of timing slack between aggregate and sub-metered events
    double match_tol_abs = 0.0;    // 0 means "use sigma_g"
    double match_tol_frac = 0.10;  // fraction of the aggregate event magnitude

    double tolerance(double delta, double sigma_g) const {
        const double base = match_tol_abs > 0.0 ? match_tol_abs : sigma_g;
        return std::max(base, match_tol_frac * std::abs(delta));
    }
};

struct LabelingStats {
    Index matched = 0;
    Index unknown = 0;
    Index ambiguous = 0;  // events with rival candidates, kept UNKNOWN
};

/**
 * Assigns each aggregate event to the sub-metered appliance event that
 * best explains it: candidates within match_window samples are ranked by
 * |dt| then |d-delta|, and must agree on magnitude within the tolerance.
 * The transition (from_mode, to_mode) is read off the appliance's own
 * filtered levels around its event. Events nothing explains are labeled
 * UNKNOWN; ties between appliances are flagged ambiguous and kept UNKNOWN.
 */
LabeledEventSet label_events(const EventSignal& agg_events, const FilteredSeries& agg_filtered,
                             const std::vector<ApplianceSpec>& registry,
                             const std::vector<SampledSeries>& submetered,
                             const DetectorConfig& cfg, const MatchConfig& match = {},
                             LabelingStats* stats = nullptr);

/// Per-sample binary water activity: 1 wherever the value exceeds the
/// noise floor (strictly positive by default).
WaterLabelSeries label_water(const SampledSeries& appliance_water, double threshold = 0.0);

struct BalanceConfig {
    enum class Target { MatchMinority, Cap };
    Target target = Target::MatchMinority;
    Index cap = 0;  // per-class ceiling when target == Cap
    std::uint64_t seed = 1;
};

/**
 * Seeded uniform under-sampling without replacement: every class is cut
 * to the minority count (or the cap), relative order preserved. Kept
 * indices into `class_ids` are returned sorted.
 */
std::vector<Index> undersample_indices(const std::vector<int>& class_ids,
                                       const BalanceConfig& cfg);

/// Under-samples a labeled event set; classes are the distinct labels.
/// Requires at least two classes.
LabeledEventSet balance_undersample(const LabeledEventSet& set, const BalanceConfig& cfg);

/**
 * Per-feature min-max parameters learned on a training split. apply maps
 * train values into [0,1]; values outside the train range extrapolate
 * (no clamping). A degenerate feature (max == min) maps to 0.
 */
struct ScalerParams {
    VectorXd min;
    VectorXd max;

    Index dim() const { return min.size(); }
};

ScalerParams fit_scaler(const MatrixXd& train);
MatrixXd apply_scaler(const ScalerParams& p, const MatrixXd& x);
VectorXd apply_scaler(const ScalerParams& p, const VectorXd& x);
/// Affine inverse of apply_scaler (degenerate features map back to min).
MatrixXd unapply_scaler(const ScalerParams& p, const MatrixXd& x);

/// Chronological split: train strictly precedes test, cut at a day
/// boundary. Throws InsufficientData when the dataset is too short.
std::pair<HouseDataset, HouseDataset> split_train_test(const HouseDataset& ds, int train_days,
                                                       int test_days);

}  // namespace nilm
