#pragma once

#include "nilm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nilm {

/// ON/OFF confusion cells. Multi-mode appliances are collapsed before
/// counting: any non-OFF mode counts as ON.
struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;

    long long total() const { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
};

ConfusionCounts count_confusion(const std::vector<std::uint8_t>& pred,
                                const std::vector<std::uint8_t>& truth);

// Zero denominators follow the usual conventions: precision/recall are 0
// when undefined, and F is 0 when precision + recall is 0.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f_measure(const ConfusionCounts& c);
double f_measure(double precision, double recall);

struct ApplianceScore {
    std::string appliance_id;
    std::string granularity;  // "event" or "timestep"
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

ApplianceScore make_score(const std::string& id, const std::string& granularity,
                          const ConfusionCounts& c);

struct DisaggregationReport {
    std::string pipeline_id;
    std::vector<ApplianceScore> scores;
    double macro_f = 0.0;  // arithmetic mean of per-appliance F (the AVG row)
    std::string config_fingerprint;
    std::uint64_t seed = 0;
};

DisaggregationReport build_report(const std::vector<ApplianceScore>& scores,
                                  const std::string& pipeline_id,
                                  const std::string& config_fingerprint = "", std::uint64_t seed = 0);

std::string report_to_json(const DisaggregationReport& r);
std::string report_to_csv(const DisaggregationReport& r);

/// FNV-1a over a canonical config dump; stamped into reports so a result
/// can be traced back to the exact effective configuration.
std::string fingerprint(const std::string& canonical_config);

}  // namespace nilm
