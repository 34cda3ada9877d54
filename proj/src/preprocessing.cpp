#include "nilm/preprocessing.hpp"

#include "nilm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace nilm {

EventSignal build_event_signal(const SampledSeries& s, const DetectorConfig& cfg) {
    return detect_events(filter_steady(s, cfg), cfg);
}

MatrixXd event_features(const EventSignal& events, const FilteredSeries& filtered) {
    if (events.domain_len != filtered.size())
        throw NilmError("DomainMismatch: event signal vs filtered series");
    MatrixXd feats(static_cast<Index>(events.events.size()), 2);
    for (std::size_t i = 0; i < events.events.size(); ++i) {
        const auto& e = events.events[i];
        feats(static_cast<Index>(i), 0) = e.delta;
        feats(static_cast<Index>(i), 1) = e.t > 0 ? filtered.values[e.t - 1] : 0.0;
    }
    return feats;
}

namespace {

int transition_from_levels(const ApplianceSpec& spec, double pre_level, double post_level,
                           int& from_mode, int& to_mode) {
    from_mode = spec.mode_for_level(pre_level);
    to_mode = spec.mode_for_level(post_level);
    return encode_transition(from_mode, to_mode);
}

struct Candidate {
    std::size_t appliance = 0;
    Index dt = 0;
    double ddelta = 0.0;
    Index event_t = 0;
    double pre_level = 0.0;
    double post_level = 0.0;
};

}  // namespace

LabeledEventSet label_events(const EventSignal& agg_events, const FilteredSeries& agg_filtered,
                             const std::vector<ApplianceSpec>& registry,
                             const std::vector<SampledSeries>& submetered,
                             const DetectorConfig& cfg, const MatchConfig& match,
                             LabelingStats* stats) {
    if (registry.size() != submetered.size())
        throw NilmError("DomainMismatch: registry vs submetered count");
    for (const auto& s : submetered)
        if (s.size() != agg_events.domain_len)
            throw NilmError("DomainMismatch: sub-metered series length " +
                            std::to_string(s.size()) + " vs aggregate domain " +
                            std::to_string(agg_events.domain_len));

    // detect events on every sub-metered channel with the same detector
    std::vector<FilteredSeries> sub_filtered;
    std::vector<EventSignal> sub_events;
    sub_filtered.reserve(submetered.size());
    for (const auto& s : submetered) {
        sub_filtered.push_back(filter_steady(s, cfg));
        sub_events.push_back(detect_events(sub_filtered.back(), cfg));
    }

    LabeledEventSet out;
    out.features = event_features(agg_events, agg_filtered);
    out.provenance = "label_events";
    LabelingStats local;

    for (const auto& agg : agg_events.events) {
        const double tol = match.tolerance(agg.delta, cfg.sigma_g);
        std::vector<Candidate> cands;
        for (std::size_t a = 0; a < sub_events.size(); ++a) {
            for (const auto& se : sub_events[a].events) {
                const Index dt = std::abs(se.t - agg.t);
                if (dt > match.match_window) continue;
                const double dd = std::abs(se.delta - agg.delta);
                if (dd > tol) continue;
                cands.push_back({a, dt, dd, se.t, sub_filtered[a].values[se.t - 1],
                                 sub_filtered[a].values[se.t]});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
            if (x.dt != y.dt) return x.dt < y.dt;
            return x.ddelta < y.ddelta;
        });

        out.event_times.push_back(agg.t);
        if (cands.empty()) {
            out.labels.push_back(EventLabel::unknown());
            ++local.unknown;
            continue;
        }
        const bool tie = cands.size() > 1 && cands[1].appliance != cands[0].appliance &&
                         cands[1].dt == cands[0].dt &&
                         std::abs(cands[1].ddelta - cands[0].ddelta) <= 1e-9;
        if (tie) {
            out.labels.push_back(EventLabel::unknown());
            ++local.unknown;
            ++local.ambiguous;
            continue;
        }
        const Candidate& best = cands.front();
        const ApplianceSpec& spec = registry[best.appliance];
        int from = 0, to = 0;
        transition_from_levels(spec, best.pre_level, best.post_level, from, to);
        out.labels.push_back({spec.id, from, to});
        ++local.matched;
    }
    out.check_consistent();
    if (stats) *stats = local;
    return out;
}

WaterLabelSeries label_water(const SampledSeries& appliance_water, double threshold) {
    if (appliance_water.kind != SignalKind::Water)
        throw NilmError("KindMismatch: label_water expects a water series");
    WaterLabelSeries out;
    out.start_time = appliance_water.start_time;
    out.step = appliance_water.step;
    out.labels.resize(appliance_water.size());
    for (Index t = 0; t < appliance_water.size(); ++t)
        out.labels[t] = appliance_water.values[t] > threshold ? 1 : 0;
    return out;
}

std::vector<Index> undersample_indices(const std::vector<int>& class_ids,
                                       const BalanceConfig& cfg) {
    std::map<int, std::vector<Index>> by_class;
    for (std::size_t i = 0; i < class_ids.size(); ++i)
        by_class[class_ids[i]].push_back(static_cast<Index>(i));

    Index target = std::numeric_limits<Index>::max();
    if (cfg.target == BalanceConfig::Target::MatchMinority) {
        for (const auto& [cls, idx] : by_class)
            target = std::min(target, static_cast<Index>(idx.size()));
    } else {
        if (cfg.cap < 1) throw NilmError("InvalidConfig: cap must be >= 1");
        target = cfg.cap;
    }

    Rng rng(cfg.seed);
    std::vector<Index> kept;
    for (auto& [cls, idx] : by_class) {
        const Index keep = std::min(target, static_cast<Index>(idx.size()));
        // partial Fisher-Yates: the first `keep` entries are a uniform sample
        for (Index i = 0; i < keep; ++i) {
            const Index j = i + static_cast<Index>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        kept.insert(kept.end(), idx.begin(), idx.begin() + keep);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

LabeledEventSet balance_undersample(const LabeledEventSet& set, const BalanceConfig& cfg) {
    set.check_consistent();
    std::map<EventLabel, int> class_of;
    std::vector<int> class_ids;
    class_ids.reserve(set.labels.size());
    for (const auto& l : set.labels) {
        auto [it, inserted] = class_of.try_emplace(l, static_cast<int>(class_of.size()));
        class_ids.push_back(it->second);
    }
    if (class_of.size() < 2) throw NilmError("SingleClass: balancing needs >= 2 classes");

    const std::vector<Index> kept = undersample_indices(class_ids, cfg);
    LabeledEventSet out;
    out.provenance = set.provenance;
    out.features.resize(static_cast<Index>(kept.size()), set.features.cols());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out.features.row(static_cast<Index>(i)) = set.features.row(kept[i]);
        out.labels.push_back(set.labels[kept[i]]);
        if (!set.event_times.empty()) out.event_times.push_back(set.event_times[kept[i]]);
    }
    return out;
}

ScalerParams fit_scaler(const MatrixXd& train) {
    if (train.rows() == 0) throw NilmError("EmptyInput: fit_scaler");
    ScalerParams p;
    p.min = train.colwise().minCoeff();
    p.max = train.colwise().maxCoeff();
    return p;
}

MatrixXd apply_scaler(const ScalerParams& p, const MatrixXd& x) {
    if (x.cols() != p.dim()) throw NilmError("DimensionMismatch: apply_scaler");
    MatrixXd out(x.rows(), x.cols());
    for (Index c = 0; c < x.cols(); ++c) {
        const double range = p.max[c] - p.min[c];
        if (range == 0.0)
            out.col(c).setZero();
        else
            out.col(c) = (x.col(c).array() - p.min[c]) / range;
    }
    return out;
}

VectorXd apply_scaler(const ScalerParams& p, const VectorXd& x) {
    MatrixXd row = x.transpose();
    return apply_scaler(p, row).row(0).transpose();
}

MatrixXd unapply_scaler(const ScalerParams& p, const MatrixXd& x) {
    if (x.cols() != p.dim()) throw NilmError("DimensionMismatch: unapply_scaler");
    MatrixXd out(x.rows(), x.cols());
    for (Index c = 0; c < x.cols(); ++c) {
        const double range = p.max[c] - p.min[c];
        out.col(c) = x.col(c).array() * range + p.min[c];
    }
    return out;
}

std::pair<HouseDataset, HouseDataset> split_train_test(const HouseDataset& ds, int train_days,
                                                       int test_days) {
    if (train_days < 1 || test_days < 1)
        throw NilmError("InvalidConfig: split needs positive day counts");
    const Index per_day = static_cast<Index>(86400.0 / ds.step());
    const Index need = static_cast<Index>(train_days + test_days) * per_day;
    if (ds.samples() < need)
        throw NilmError("InsufficientData: need " + std::to_string(need) + " samples, have " +
                        std::to_string(ds.samples()));
    const Index cut = static_cast<Index>(train_days) * per_day;
    return {ds.slice(0, cut), ds.slice(cut, static_cast<Index>(test_days) * per_day)};
}

}  // namespace nilm
