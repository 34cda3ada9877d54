#include "nilm/pipelines.hpp"

#include <algorithm>
#include <cmath>

namespace nilm {

Phase1Result run_phase1(const SampledSeries& agg_power, const KnnModel& knn,
                        const DetectorConfig& cfg, const std::set<std::string>& overlap_group) {
    const FilteredSeries filtered = filter_steady(agg_power, cfg);
    const EventSignal events = detect_events(filtered, cfg);
    const StreamClassification cls = knn_classify_stream(knn, events, filtered, overlap_group);
    Phase1Result out;
    out.ambiguous = cls.ambiguous;
    for (const auto& [id, evs] : cls.per_appliance)
        if (!overlap_group.count(id)) out.per_appliance[id] = evs;
    return out;
}

Phase2Data build_phase2_data(const HouseDataset& ds, const DetectorConfig& cfg,
                             const std::vector<std::string>& target_ids) {
    ds.check_aligned();
    Phase2Data data;
    data.start_time = ds.aggregate_power.start_time;
    data.step = ds.step();
    data.event_dense = build_event_signal(ds.aggregate_power, cfg).to_dense();
    data.agg_power = ds.aggregate_power.values;
    data.agg_water = ds.aggregate_water.values;
    for (const auto& id : target_ids) {
        const int a = ds.find_appliance(id);
        if (a < 0) throw NilmError("InvalidConfig: unknown appliance " + id);
        Phase2Data::Target tgt;
        tgt.appliance_id = id;
        tgt.power_on.resize(ds.samples());
        for (Index t = 0; t < ds.samples(); ++t)
            tgt.power_on[t] = ds.appliance_power[a].values[t] > 0.0 ? 1 : 0;
        tgt.water_on = label_water(ds.appliance_water[a]).labels;
        data.targets.push_back(std::move(tgt));
    }
    return data;
}

namespace {

using Mat = LstmNet<double>::Mat;

// channel-stacked windows with per-window ON/OFF class for balancing
std::vector<SeqSample<double>> make_windows(const std::vector<const ArrayXd*>& channels,
                                            const std::vector<const std::vector<std::uint8_t>*>& labels,
                                            const WindowConfig& wc, std::uint64_t balance_seed) {
    const Index n = channels.front()->size();
    const Index len = std::min(wc.window_len, n);
    const Index stride = wc.stride();

    std::vector<SeqSample<double>> windows;
    std::vector<int> window_class;
    for (Index start = 0; start + len <= n; start += stride) {
        SeqSample<double> s;
        s.inputs.resize(len, static_cast<Index>(channels.size()));
        s.targets.resize(len, static_cast<Index>(labels.size()));
        bool any_on = false;
        for (Index t = 0; t < len; ++t) {
            for (std::size_t c = 0; c < channels.size(); ++c)
                s.inputs(t, static_cast<Index>(c)) = (*channels[c])[start + t];
            for (std::size_t c = 0; c < labels.size(); ++c) {
                const double v = (*labels[c])[start + t];
                s.targets(t, static_cast<Index>(c)) = v;
                any_on |= v != 0.0;
            }
        }
        windows.push_back(std::move(s));
        window_class.push_back(any_on ? 1 : 0);
    }

    // all-OFF windows dominate; cut them down to the active count
    const bool both = std::count(window_class.begin(), window_class.end(), 1) > 0 &&
                      std::count(window_class.begin(), window_class.end(), 0) > 0;
    if (!both) return windows;
    BalanceConfig bc;
    bc.seed = balance_seed;
    const std::vector<Index> kept = undersample_indices(window_class, bc);
    std::vector<SeqSample<double>> out;
    out.reserve(kept.size());
    for (Index i : kept) out.push_back(std::move(windows[i]));
    return out;
}

ScalerParams fit_channel_scaler(const std::vector<const ArrayXd*>& channels) {
    MatrixXd m(channels.front()->size(), static_cast<Index>(channels.size()));
    for (std::size_t c = 0; c < channels.size(); ++c) m.col(static_cast<Index>(c)) = *channels[c];
    return fit_scaler(m);
}

ArrayXd scale_channel(double min, double max, const ArrayXd& x) {
    const double range = max - min;
    if (range == 0.0) return ArrayXd::Zero(x.size());
    return (x - min) / range;
}

std::vector<ArrayXd> scale_channels(const ScalerParams& p, const std::vector<const ArrayXd*>& ch) {
    std::vector<ArrayXd> out;
    for (std::size_t c = 0; c < ch.size(); ++c)
        out.push_back(scale_channel(p.min[static_cast<Index>(c)], p.max[static_cast<Index>(c)], *ch[c]));
    return out;
}

LstmConfig with_dims(LstmConfig lc, int input_dim, int output_dim) {
    lc.input_dim = input_dim;
    lc.output_dim = output_dim;
    return lc;
}

ApplianceNet train_one(const std::string& id, const std::vector<const ArrayXd*>& raw_channels,
                       const std::vector<const std::vector<std::uint8_t>*>& labels,
                       const LstmConfig& lc, const TrainConfig& tc, const WindowConfig& wc,
                       std::uint64_t net_index) {
    ApplianceNet an;
    an.appliance_id = id;

    const ScalerParams scaler = fit_channel_scaler(raw_channels);
    const std::vector<ArrayXd> scaled = scale_channels(scaler, raw_channels);
    std::vector<const ArrayXd*> scaled_ptrs;
    for (const auto& c : scaled) scaled_ptrs.push_back(&c);

    TrainConfig tc_net = tc;
    tc_net.seed = Rng(tc.seed).fork(net_index).next_u64();
    const auto windows = make_windows(scaled_ptrs, labels, wc, tc_net.seed);

    Rng init_rng(tc_net.seed ^ 0xa5a5a5a5ULL);
    an.net = LstmNet<double>::init(with_dims(lc, static_cast<int>(raw_channels.size()),
                                             static_cast<int>(labels.size())),
                                   init_rng);
    an.net.input_scaler = scaler;
    an.log = train(an.net, windows, tc_net);
    return an;
}

Mat stack_inputs(const LstmNet<double>& net, const std::vector<const ArrayXd*>& raw_channels) {
    const Index n = raw_channels.front()->size();
    Mat inputs(n, static_cast<Index>(raw_channels.size()));
    for (std::size_t c = 0; c < raw_channels.size(); ++c) {
        const Index ci = static_cast<Index>(c);
        inputs.col(ci) = scale_channel(net.input_scaler.min[ci], net.input_scaler.max[ci],
                                       *raw_channels[c]);
    }
    return inputs;
}

ArrayXd predict_channel(const LstmNet<double>& net, const std::vector<const ArrayXd*>& raw,
                        const WindowConfig& wc, Index output_col) {
    const Mat probs = predict_sequence(net, stack_inputs(net, raw), wc.window_len);
    return probs.col(output_col).array();
}

std::vector<std::uint8_t> threshold_bits(const ArrayXd& probs, double threshold) {
    std::vector<std::uint8_t> bits(probs.size());
    for (Index t = 0; t < probs.size(); ++t) bits[t] = probs[t] >= threshold ? 1 : 0;
    return bits;
}

}  // namespace

ParallelNet train_parallel(const Phase2Data& data, const LstmConfig& lc, const TrainConfig& tc,
                           const WindowConfig& wc) {
    if (data.targets.empty()) throw NilmError("EmptyInput: no Phase-2 target appliances");
    ParallelNet out;
    std::uint64_t k = 0;
    for (const auto& tgt : data.targets) {
        out.nets.push_back(train_one(tgt.appliance_id, {&data.event_dense, &data.agg_water},
                                     {&tgt.power_on, &tgt.water_on}, lc, tc, wc, k++));
    }
    return out;
}

std::vector<IterativeChain> train_iterative(const Phase2Data& data, const LstmConfig& lc,
                                            const TrainConfig& tc, const WindowConfig& wc) {
    if (data.targets.empty()) throw NilmError("EmptyInput: no Phase-2 target appliances");
    std::vector<IterativeChain> out;
    std::uint64_t k = 100;
    for (const auto& tgt : data.targets) {
        IterativeChain chain;
        chain.appliance_id = tgt.appliance_id;

        auto s1 = train_one(tgt.appliance_id, {&data.agg_power}, {&tgt.power_on}, lc, tc, wc, k++);
        chain.power1 = s1.net;
        chain.log1 = s1.log;
        // stages 2 and 3 consume predictions, not ground truth
        const ArrayXd p1 = predict_channel(chain.power1, {&data.agg_power}, wc, 0);

        auto s2 = train_one(tgt.appliance_id, {&p1, &data.agg_water}, {&tgt.water_on}, lc, tc, wc,
                            k++);
        chain.water2 = s2.net;
        chain.log2 = s2.log;
        const ArrayXd p2 = predict_channel(chain.water2, {&p1, &data.agg_water}, wc, 0);

        auto s3 = train_one(tgt.appliance_id, {&data.agg_power, &p2}, {&tgt.power_on}, lc, tc, wc,
                            k++);
        chain.power3 = s3.net;
        chain.log3 = s3.log;
        out.push_back(std::move(chain));
    }
    return out;
}

BaselineNets train_baselines(const Phase2Data& data, const LstmConfig& lc, const TrainConfig& tc,
                             const WindowConfig& wc) {
    if (data.targets.empty()) throw NilmError("EmptyInput: no Phase-2 target appliances");
    BaselineNets out;
    std::uint64_t k = 200;
    for (const auto& tgt : data.targets) {
        out.power.push_back(
            train_one(tgt.appliance_id, {&data.event_dense}, {&tgt.power_on}, lc, tc, wc, k++));
        out.water.push_back(
            train_one(tgt.appliance_id, {&data.agg_water}, {&tgt.water_on}, lc, tc, wc, k++));
    }
    return out;
}

BitSeries infer_parallel(const ApplianceNet& an, const Phase2Data& data, const WindowConfig& wc) {
    const Mat probs =
        predict_sequence(an.net, stack_inputs(an.net, {&data.event_dense, &data.agg_water}),
                         wc.window_len);
    return {threshold_bits(probs.col(0).array(), wc.threshold),
            threshold_bits(probs.col(1).array(), wc.threshold)};
}

BitSeries infer_iterative(const IterativeChain& chain, const Phase2Data& data,
                          const WindowConfig& wc) {
    const ArrayXd p1 = predict_channel(chain.power1, {&data.agg_power}, wc, 0);
    const ArrayXd p2 = predict_channel(chain.water2, {&p1, &data.agg_water}, wc, 0);
    const ArrayXd p3 = predict_channel(chain.power3, {&data.agg_power, &p2}, wc, 0);
    return {threshold_bits(p3, wc.threshold), threshold_bits(p2, wc.threshold)};
}

std::vector<std::uint8_t> infer_baseline_power(const ApplianceNet& an, const Phase2Data& data,
                                               const WindowConfig& wc) {
    return threshold_bits(predict_channel(an.net, {&data.event_dense}, wc, 0), wc.threshold);
}

std::vector<std::uint8_t> infer_baseline_water(const ApplianceNet& an, const Phase2Data& data,
                                               const WindowConfig& wc) {
    return threshold_bits(predict_channel(an.net, {&data.agg_water}, wc, 0), wc.threshold);
}

SampledSeries reconstruct_profile(const std::vector<LabeledEvent>& events,
                                  const ApplianceSpec& spec, Index domain_len,
                                  std::int64_t start_time, double step, bool snap_to_modes,
                                  std::vector<std::string>* violations) {
    ArrayXd values = ArrayXd::Zero(domain_len);
    double level = 0.0;
    int prev_mode = 0;
    std::size_t e = 0;
    std::vector<LabeledEvent> sorted = events;
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledEvent& a, const LabeledEvent& b) { return a.t < b.t; });
    for (Index t = 0; t < domain_len; ++t) {
        while (e < sorted.size() && sorted[e].t == t) {
            level += sorted[e].delta;
            if (level < 0.0) {
                if (violations)
                    violations->push_back("negative level at t=" + std::to_string(t) + " for " +
                                          spec.id);
                level = 0.0;
            }
            if (snap_to_modes) {
                const int mode = spec.mode_for_level(level);
                if (mode == prev_mode && violations)
                    violations->push_back("mode " + std::to_string(mode) + " -> " +
                                          std::to_string(mode) + " at t=" + std::to_string(t) +
                                          " for " + spec.id);
                prev_mode = mode;
            }
            ++e;
        }
        if (snap_to_modes) {
            const ApplianceMode* m = spec.find_mode(spec.mode_for_level(level));
            values[t] = m ? 0.5 * (m->power_low + m->power_high) : level;
        } else {
            values[t] = level;
        }
    }
    return {start_time, step, values, SignalKind::Power};
}

SampledSeries reconstruct_profile(const BitSeries& bits, const ApplianceSpec& spec,
                                  std::int64_t start_time, double step) {
    double midpoint = 0.0;
    for (const auto& m : spec.modes)
        if (m.index != 0) {
            midpoint = 0.5 * (m.power_low + m.power_high);
            break;
        }
    ArrayXd values = ArrayXd::Zero(static_cast<Index>(bits.power.size()));
    for (std::size_t t = 0; t < bits.power.size(); ++t)
        if (bits.power[t]) values[static_cast<Index>(t)] = midpoint;
    return {start_time, step, values, SignalKind::Power};
}

SampledSeries reconstruct_water(const BitSeries& bits, const ApplianceSpec& spec,
                                std::int64_t start_time, double step) {
    double flow = 0.0;
    for (const auto& w : spec.water_program) flow += w.flow;
    if (!spec.water_program.empty()) flow /= static_cast<double>(spec.water_program.size());
    ArrayXd values = ArrayXd::Zero(static_cast<Index>(bits.water.size()));
    for (std::size_t t = 0; t < bits.water.size(); ++t)
        if (bits.water[t]) values[static_cast<Index>(t)] = flow;
    return {start_time, step, values, SignalKind::Water};
}

std::vector<std::uint8_t> power_truth_bits(const HouseDataset& ds,
                                           const std::string& appliance_id) {
    const int a = ds.find_appliance(appliance_id);
    if (a < 0) throw NilmError("InvalidConfig: unknown appliance " + appliance_id);
    std::vector<std::uint8_t> bits(ds.samples());
    for (Index t = 0; t < ds.samples(); ++t)
        bits[t] = ds.appliance_power[a].values[t] > 0.0 ? 1 : 0;
    return bits;
}

std::vector<std::uint8_t> water_truth_bits(const HouseDataset& ds,
                                           const std::string& appliance_id) {
    const int a = ds.find_appliance(appliance_id);
    if (a < 0) throw NilmError("InvalidConfig: unknown appliance " + appliance_id);
    return label_water(ds.appliance_water[a]).labels;
}

std::vector<ApplianceScore> evaluate_knn_events(const KnnModel& model, const HouseDataset& test,
                                                const DetectorConfig& cfg,
                                                const MatchConfig& match) {
    const FilteredSeries filtered = filter_steady(test.aggregate_power, cfg);
    const EventSignal events = detect_events(filtered, cfg);
    const LabeledEventSet truth =
        label_events(events, filtered, test.registry, test.appliance_power, cfg, match);
    const MatrixXd feats = event_features(events, filtered);

    std::vector<EventLabel> pred;
    pred.reserve(static_cast<std::size_t>(feats.rows()));
    for (Index i = 0; i < feats.rows(); ++i)
        pred.push_back(knn_predict(model, feats.row(i).transpose()).label);

    std::vector<ApplianceScore> scores;
    for (const auto& spec : test.registry) {
        bool has_events = spec.modes.size() > 1;
        if (!has_events) continue;  // power-free appliances produce no events
        ConfusionCounts c;
        for (Index i = 0; i < feats.rows(); ++i) {
            const bool p = pred[static_cast<std::size_t>(i)].appliance_id == spec.id;
            const bool t = truth.labels[static_cast<std::size_t>(i)].appliance_id == spec.id;
            if (p && t)
                ++c.tp;
            else if (p && !t)
                ++c.fp;
            else if (!p && t)
                ++c.fn;
            else
                ++c.tn;
        }
        scores.push_back(make_score(spec.id, "event", c));
    }
    return scores;
}

ApplianceScore evaluate_bits(const std::string& appliance_id, const std::vector<std::uint8_t>& pred,
                             const std::vector<std::uint8_t>& truth) {
    return make_score(appliance_id, "timestep", count_confusion(pred, truth));
}

}  // namespace nilm
