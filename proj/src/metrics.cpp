#include "nilm/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

namespace nilm {

ConfusionCounts count_confusion(const std::vector<std::uint8_t>& pred,
                                const std::vector<std::uint8_t>& truth) {
    if (pred.size() != truth.size())
        throw NilmError("LengthMismatch: pred " + std::to_string(pred.size()) + " vs truth " +
                        std::to_string(truth.size()));
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0;
        const bool t = truth[i] != 0;
        if (p && t)
            ++c.tp;
        else if (p && !t)
            ++c.fp;
        else if (!p && t)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double precision(const ConfusionCounts& c) {
    const long long denom = c.tp + c.fp;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double recall(const ConfusionCounts& c) {
    const long long denom = c.tp + c.fn;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f_measure(double precision, double recall) {
    const double denom = precision + recall;
    return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

double f_measure(const ConfusionCounts& c) { return f_measure(precision(c), recall(c)); }

ApplianceScore make_score(const std::string& id, const std::string& granularity,
                          const ConfusionCounts& c) {
    ApplianceScore s;
    s.appliance_id = id;
    s.granularity = granularity;
    s.counts = c;
    s.precision = precision(c);
    s.recall = recall(c);
    s.f = f_measure(c);
    return s;
}

DisaggregationReport build_report(const std::vector<ApplianceScore>& scores,
                                  const std::string& pipeline_id,
                                  const std::string& config_fingerprint, std::uint64_t seed) {
    if (scores.empty()) throw NilmError("EmptyInput: build_report needs >= 1 appliance");
    DisaggregationReport r;
    r.pipeline_id = pipeline_id;
    r.scores = scores;
    r.config_fingerprint = config_fingerprint;
    r.seed = seed;
    double sum = 0.0;
    for (const auto& s : scores) sum += s.f;
    r.macro_f = sum / static_cast<double>(scores.size());
    return r;
}

namespace {
std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}
}  // namespace

std::string report_to_json(const DisaggregationReport& r) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["pipeline"] = r.pipeline_id;
    j["config_fingerprint"] = r.config_fingerprint;
    j["seed"] = r.seed;
    j["appliances"] = nlohmann::ordered_json::array();
    for (const auto& s : r.scores) {
        j["appliances"].push_back({{"id", s.appliance_id},
                                   {"granularity", s.granularity},
                                   {"tp", s.counts.tp},
                                   {"fp", s.counts.fp},
                                   {"tn", s.counts.tn},
                                   {"fn", s.counts.fn},
                                   {"precision", s.precision},
                                   {"recall", s.recall},
                                   {"f_measure", s.f}});
    }
    j["avg_f_measure"] = r.macro_f;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const DisaggregationReport& r) {
    std::string out = "appliance,granularity,precision,recall,f_measure\n";
    for (const auto& s : r.scores)
        out += s.appliance_id + "," + s.granularity + "," + fmt3(s.precision) + "," +
               fmt3(s.recall) + "," + fmt3(s.f) + "\n";
    out += "AVG,,,," + fmt3(r.macro_f) + "\n";
    return out;
}

std::string fingerprint(const std::string& canonical_config) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_config) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nilm
