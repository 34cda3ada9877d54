#pragma once

#include "nilm/event_detection.hpp"
#include "nilm/preprocessing.hpp"
#include "nilm/types.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace nilm {

/**
 * K-nearest-neighbor classifier over event features. Stores the min-max
 * scaled training matrix; prediction is an exhaustive linear scan (the
 * training sets here are small enough that the brute-force search is the
 * contract, not an approximation).
 */
struct KnnModel {
    int k = 7;
    double minkowski_p = 2.0;
    MatrixXd features;  // scaled rows
    std::vector<EventLabel> labels;
    ScalerParams scaler;

    Index size() const { return features.rows(); }
};

/**
 * Fits the model: learns the scaler on the training features and stores
 * the scaled matrix. UNKNOWN-labeled events are dropped (they mark
 * detector misses, not a class). k must be in (1, |train|].
 */
KnnModel knn_fit(const LabeledEventSet& train, int k = 7, double minkowski_p = 2.0);

struct KnnPrediction {
    EventLabel label;
    std::vector<double> neighbor_distances;  // the voting neighborhood, ascending
};

/**
 * Majority vote among the k nearest training points by Minkowski-p
 * distance (all points tied with the k-th distance join the vote). Ties
 * between labels break by smaller mean distance, then by label ordering,
 * so predictions are independent of training-set order.
 */
KnnPrediction knn_predict(const KnnModel& model, const VectorXd& event_feature);

struct LabeledEvent {
    Index t = 0;
    double delta = 0.0;
    EventLabel label;
};

struct StreamClassification {
    std::map<std::string, std::vector<LabeledEvent>> per_appliance;
    std::vector<LabeledEvent> ambiguous;  // events routed to Phase 2
};

/**
 * Classifies every event of a stream. Events predicted as an appliance in
 * the overlap group keep their label but are also copied to the ambiguous
 * set for Phase-2 refinement.
 */
StreamClassification knn_classify_stream(const KnnModel& model, const EventSignal& events,
                                         const FilteredSeries& filtered,
                                         const std::set<std::string>& overlap_group);

/// Overlapping-band appliances routed to Phase 2 by default.
std::set<std::string> default_overlap_group();

void save_knn_csv(const KnnModel& model, const std::string& path);
KnnModel load_knn_csv(const std::string& path);

}  // namespace nilm
