#pragma once

#include "nilm/data_io.hpp"
#include "nilm/event_detection.hpp"
#include "nilm/knn.hpp"
#include "nilm/lstm.hpp"
#include "nilm/metrics.hpp"
#include "nilm/preprocessing.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace nilm {

struct WindowConfig {
    Index window_len = 60;   // samples per training window (one hour at minutely data)
    double overlap = 0.5;    // fraction of window shared by consecutive windows
    double threshold = 0.5;  // sigmoid cut for ON

    Index stride() const {
        const Index s = static_cast<Index>(window_len * (1.0 - overlap));
        return std::max<Index>(1, s);
    }
};

/// Phase-1 output: events already attributed to exclusive appliances,
/// plus the events whose predicted appliance overlaps other power bands
/// (those are re-examined by Phase 2).
struct Phase1Result {
    std::map<std::string, std::vector<LabeledEvent>> per_appliance;
    std::vector<LabeledEvent> ambiguous;
};

Phase1Result run_phase1(const SampledSeries& agg_power, const KnnModel& knn,
                        const DetectorConfig& cfg, const std::set<std::string>& overlap_group);

/// Aligned per-timestep channels and targets for Phase-2 training or
/// inference, derived from one dataset span.
struct Phase2Data {
    std::int64_t start_time = 0;
    double step = 60.0;
    ArrayXd event_dense;  // dense rendering of the aggregate event signal
    ArrayXd agg_power;    // raw aggregate power (iterative stages 1 and 3)
    ArrayXd agg_water;

    struct Target {
        std::string appliance_id;
        std::vector<std::uint8_t> power_on;  // any non-OFF mode counts as ON
        std::vector<std::uint8_t> water_on;
    };
    std::vector<Target> targets;

    Index samples() const { return event_dense.size(); }
};

Phase2Data build_phase2_data(const HouseDataset& ds, const DetectorConfig& cfg,
                             const std::vector<std::string>& target_ids);

/// One trained per-appliance network plus its training curve.
struct ApplianceNet {
    std::string appliance_id;
    LstmNet<double> net;
    TrainLog log;
};

/// Fig.-5 style Phase 2: per appliance one LSTM fed (event signal,
/// aggregate water) emitting (power bit, water bit) each timestep.
struct ParallelNet {
    std::vector<ApplianceNet> nets;
};

/// Fig.-6 style Phase 2: three chained LSTMs per appliance. Stages 2 and
/// 3 are trained on the upstream stage's predictions, not ground truth,
/// to match the inference-time input distribution.
struct IterativeChain {
    std::string appliance_id;
    LstmNet<double> power1;  // aggregate power -> power bit
    LstmNet<double> water2;  // (stage-1 output, aggregate water) -> water bit
    LstmNet<double> power3;  // (aggregate power, stage-2 output) -> power bit
    TrainLog log1, log2, log3;
};

/// Single-input reference networks: power-only (event signal -> power
/// bit) and water-only (aggregate water -> water bit).
struct BaselineNets {
    std::vector<ApplianceNet> power;
    std::vector<ApplianceNet> water;
};

ParallelNet train_parallel(const Phase2Data& data, const LstmConfig& lc, const TrainConfig& tc,
                           const WindowConfig& wc);
std::vector<IterativeChain> train_iterative(const Phase2Data& data, const LstmConfig& lc,
                                            const TrainConfig& tc, const WindowConfig& wc);
BaselineNets train_baselines(const Phase2Data& data, const LstmConfig& lc, const TrainConfig& tc,
                             const WindowConfig& wc);

/// Per-timestep activity decisions for one appliance.
struct BitSeries {
    std::vector<std::uint8_t> power;
    std::vector<std::uint8_t> water;
};

BitSeries infer_parallel(const ApplianceNet& an, const Phase2Data& data, const WindowConfig& wc);
BitSeries infer_iterative(const IterativeChain& chain, const Phase2Data& data,
                          const WindowConfig& wc);
std::vector<std::uint8_t> infer_baseline_power(const ApplianceNet& an, const Phase2Data& data,
                                               const WindowConfig& wc);
std::vector<std::uint8_t> infer_baseline_water(const ApplianceNet& an, const Phase2Data& data,
                                               const WindowConfig& wc);

/**
 * Piecewise-constant power profile from an appliance's event stream:
 * signed deltas are integrated and, when snap_to_modes is set, the
 * running level is snapped to the nearest mode midpoint. Events that do
 * not change the snapped mode (e.g. OFF->OFF) are reported as mode-graph
 * violations; reconstruction continues best-effort.
 */
SampledSeries reconstruct_profile(const std::vector<LabeledEvent>& events,
                                  const ApplianceSpec& spec, Index domain_len,
                                  std::int64_t start_time, double step, bool snap_to_modes = true,
                                  std::vector<std::string>* violations = nullptr);

/// Profile from per-timestep bits: the first non-OFF mode's midpoint when
/// the power bit is set; water flow is the program's mean rate.
SampledSeries reconstruct_profile(const BitSeries& bits, const ApplianceSpec& spec,
                                  std::int64_t start_time, double step);
SampledSeries reconstruct_water(const BitSeries& bits, const ApplianceSpec& spec,
                                std::int64_t start_time, double step);

// --- evaluation ---

std::vector<std::uint8_t> power_truth_bits(const HouseDataset& ds, const std::string& appliance_id);
std::vector<std::uint8_t> water_truth_bits(const HouseDataset& ds, const std::string& appliance_id);

/// Event-level Phase-1 scoring: ground truth from label_events on the
/// sub-metered channels, predictions from the classifier, one-vs-rest
/// confusion per appliance. UNKNOWN ground truth counts against whatever
/// was predicted.
std::vector<ApplianceScore> evaluate_knn_events(const KnnModel& model, const HouseDataset& test,
                                                const DetectorConfig& cfg,
                                                const MatchConfig& match = {});

ApplianceScore evaluate_bits(const std::string& appliance_id,
                             const std::vector<std::uint8_t>& pred,
                             const std::vector<std::uint8_t>& truth);

}  // namespace nilm
