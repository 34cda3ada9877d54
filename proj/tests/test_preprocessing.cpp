#include "nilm/preprocessing.hpp"
#include "nilm/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace nilm;

namespace {
const DetectorConfig kDet{15.0};
}

TEST_CASE("a flat series renders an all-zero event signal") {
    SampledSeries s{0, 60, ArrayXd::Constant(100, 250.0), SignalKind::Power};
    const auto sig = build_event_signal(s, kDet);
    CHECK(sig.events.empty());
    CHECK(sig.to_dense().abs().maxCoeff() == 0.0);
}

TEST_CASE("one dryer cycle yields a matched on/off event pair in band") {
    SimConfig cfg;
    cfg.duration_days = 1;
    cfg.noise_std = 0.0;
    cfg.seed = 4;
    cfg.usage["dryer"] = {1.0, 30.0, {{2, 40, 60}}};
    const auto ds = simulate_house(cfg, {{"dryer", {{0, 0, 0}, {2, 4000, 5000}}, {}}});
    const auto sig = build_event_signal(ds.aggregate_power, kDet);
    if (!sig.events.empty()) {
        REQUIRE(sig.events.size() == 2);
        CHECK(sig.events[0].delta >= 4000.0);
        CHECK(sig.events[0].delta <= 5000.0);
        CHECK(sig.events[1].delta == doctest::Approx(-sig.events[0].delta));
    }
}

TEST_CASE("dense rendering count equals the detected event count on a full house") {
    const auto ds = simulate_house(default_sim_config(1, 9, 5.0), default_sim_registry());
    const auto sig = build_event_signal(ds.aggregate_power, kDet);
    CHECK(static_cast<std::size_t>((sig.to_dense() != 0.0).count()) == sig.events.size());
    CHECK(!sig.events.empty());
}

TEST_CASE("labeling an appliance against its own signal leaves nothing unknown") {
    SimConfig cfg;
    cfg.duration_days = 2;
    cfg.noise_std = 0.0;
    cfg.seed = 6;
    cfg.usage["basement"] = {5.0, 20.0, {{2, 30, 90}}};
    std::vector<ApplianceSpec> reg{{"basement", {{0, 0, 0}, {2, 330, 350}}, {}}};
    const auto ds = simulate_house(cfg, reg);

    const auto filtered = filter_steady(ds.aggregate_power, kDet);
    const auto events = detect_events(filtered, kDet);
    REQUIRE(!events.events.empty());
    LabelingStats stats;
    const auto set =
        label_events(events, filtered, reg, {ds.appliance_power[0]}, kDet, {}, &stats);
    CHECK(stats.unknown == 0);
    CHECK(stats.matched == static_cast<Index>(events.events.size()));
    for (const auto& l : set.labels) CHECK(l.appliance_id == "basement");
}

TEST_CASE("disjoint-range appliances are labeled perfectly without noise") {
    SimConfig cfg;
    cfg.duration_days = 5;
    cfg.noise_std = 0.0;
    cfg.seed = 31;
    cfg.usage["dryer"] = {2.0, 30.0, {{2, 40, 60}}};
    cfg.usage["basement"] = {6.0, 20.0, {{2, 30, 90}}};
    std::vector<ApplianceSpec> reg{{"dryer", {{0, 0, 0}, {2, 4000, 5000}}, {}},
                                   {"basement", {{0, 0, 0}, {2, 330, 350}}, {}}};
    const auto ds = simulate_house(cfg, reg);
    const auto filtered = filter_steady(ds.aggregate_power, kDet);
    const auto events = detect_events(filtered, kDet);
    const auto set = label_events(events, filtered, reg, ds.appliance_power, kDet);

    // the bands identify the causing appliance, so check every label against its band
    Index correct = 0, total = 0;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        const double mag = std::abs(set.features(static_cast<Index>(i), 0));
        const std::string expected = mag > 2000.0 ? "dryer" : "basement";
        total++;
        correct += set.labels[i].appliance_id == expected;
    }
    REQUIRE(total > 10);
    CHECK(correct == total);
}

TEST_CASE("disjoint-range labeling survives noise at a third of the gate") {
    SimConfig cfg;
    cfg.duration_days = 5;
    cfg.noise_std = kDet.sigma_g / 3.0;
    cfg.seed = 32;
    cfg.usage["dryer"] = {2.0, 30.0, {{2, 40, 60}}};
    cfg.usage["basement"] = {6.0, 20.0, {{2, 30, 90}}};
    std::vector<ApplianceSpec> reg{{"dryer", {{0, 0, 0}, {2, 4000, 5000}}, {}},
                                   {"basement", {{0, 0, 0}, {2, 330, 350}}, {}}};
    const auto ds = simulate_house(cfg, reg);
    const auto filtered = filter_steady(ds.aggregate_power, kDet);
    const auto events = detect_events(filtered, kDet);
    const auto set = label_events(events, filtered, reg, ds.appliance_power, kDet);

    Index correct = 0, total = 0;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        const double mag = std::abs(set.features(static_cast<Index>(i), 0));
        const std::string expected = mag > 2000.0 ? "dryer" : "basement";
        total++;
        correct += set.labels[i].appliance_id == expected;
    }
    REQUIRE(total > 10);
    CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("simultaneous overlapping switches are flagged rather than guessed") {
    // two appliances with identical bands switching in the same minute
    const Index n = 60;
    ArrayXd a = ArrayXd::Zero(n), b = ArrayXd::Zero(n);
    for (Index t = 20; t < 40; ++t) a[t] = 150.0;
    for (Index t = 20; t < 45; ++t) b[t] = 180.0;
    std::vector<ApplianceSpec> reg{{"fridge", {{0, 0, 0}, {2, 100, 200}}, {}},
                                   {"dishwasher", {{0, 0, 0}, {2, 100, 200}}, {}}};
    std::vector<SampledSeries> sub{{0, 60, a, SignalKind::Power},
                                   {0, 60, b, SignalKind::Power}};
    SampledSeries agg{0, 60, a + b, SignalKind::Power};
    const auto filtered = filter_steady(agg, kDet);
    const auto events = detect_events(filtered, kDet);
    REQUIRE(!events.events.empty());
    LabelingStats stats;
    const auto set = label_events(events, filtered, reg, sub, kDet, {}, &stats);
    CHECK(stats.unknown + stats.ambiguous > 0);
}

TEST_CASE("label_events rejects misaligned domains") {
    ArrayXd v = ArrayXd::Zero(50);
    SampledSeries agg{0, 60, v, SignalKind::Power};
    const auto filtered = filter_steady(agg, kDet);
    const auto events = detect_events(filtered, kDet);
    std::vector<ApplianceSpec> reg{{"x", {{0, 0, 0}, {2, 1, 2}}, {}}};
    std::vector<SampledSeries> sub{{0, 60, ArrayXd::Zero(49), SignalKind::Power}};
    CHECK_THROWS_WITH_AS(label_events(events, filtered, reg, sub, kDet),
                         doctest::Contains("DomainMismatch"), NilmError);
}

TEST_CASE("label_water follows the definition") {
    SampledSeries zero{0, 60, ArrayXd::Zero(5), SignalKind::Water};
    const auto none = label_water(zero);
    CHECK(std::count(none.labels.begin(), none.labels.end(), 1) == 0);

    ArrayXd prog(7);
    prog << 0, 0, 2, 2, 0, 1, 0;
    const auto labels = label_water({0, 60, prog, SignalKind::Water});
    const std::vector<std::uint8_t> expect{0, 0, 1, 1, 0, 1, 0};
    CHECK(labels.labels == expect);

    SampledSeries wrong{0, 60, prog, SignalKind::Power};
    CHECK_THROWS_WITH_AS(label_water(wrong), doctest::Contains("KindMismatch"), NilmError);
}

TEST_CASE("simulated dishwasher water labels cover the program, 13 wet minutes per cycle") {
    SimConfig cfg = default_sim_config(5, 13, 0.0);
    const auto ds = simulate_house(cfg, table1_registry());
    const int dw = ds.find_appliance("dishwasher");
    const auto labels = label_water(ds.appliance_water[dw]);
    const ArrayXd& power = ds.appliance_power[dw].values;

    Index starts = 0;
    for (Index t = 1; t < power.size() - 21; ++t)
        if (power[t] > 0.0 && power[t - 1] == 0.0) ++starts;
    REQUIRE(starts > 0);
    const Index wet = std::count(labels.labels.begin(), labels.labels.end(), 1);
    // 6 + 4 + 3 wet minutes per full cycle; the last cycle may be clipped
    CHECK(wet >= 13 * starts - 13);
    CHECK(wet <= 13 * (starts + 1));
}

TEST_CASE("balancing leaves already-balanced classes untouched") {
    LabeledEventSet set;
    set.features = MatrixXd::Random(20, 2);
    for (int i = 0; i < 10; ++i) set.labels.push_back({"a", 0, 2});
    for (int i = 0; i < 10; ++i) set.labels.push_back({"b", 0, 2});
    const auto out = balance_undersample(set, {});
    CHECK(out.size() == 20);
}

TEST_CASE("balancing cuts the majority to the minority count, deterministically") {
    LabeledEventSet set;
    set.features.resize(110, 1);
    for (int i = 0; i < 110; ++i) set.features(i, 0) = i;
    for (int i = 0; i < 100; ++i) set.labels.push_back({"a", 0, 2});
    for (int i = 0; i < 10; ++i) set.labels.push_back({"b", 0, 2});
    BalanceConfig cfg;
    cfg.seed = 42;
    const auto out = balance_undersample(set, cfg);
    std::map<std::string, int> counts;
    for (const auto& l : out.labels) counts[l.appliance_id]++;
    CHECK(counts["a"] == 10);
    CHECK(counts["b"] == 10);

    const auto again = balance_undersample(set, cfg);
    CHECK((again.features == out.features));

    // never invents samples, preserves relative order
    std::set<double> input_ids;
    for (int i = 0; i < 110; ++i) input_ids.insert(set.features(i, 0));
    double prev = -1;
    for (Index i = 0; i < out.size(); ++i) {
        CHECK(input_ids.count(out.features(i, 0)) == 1);
        CHECK(out.features(i, 0) > prev);
        prev = out.features(i, 0);
    }
}

TEST_CASE("three classes all land on the minority count") {
    LabeledEventSet set;
    set.features = MatrixXd::Random(160, 2);
    for (int i = 0; i < 100; ++i) set.labels.push_back({"a", 0, 2});
    for (int i = 0; i < 50; ++i) set.labels.push_back({"b", 0, 2});
    for (int i = 0; i < 10; ++i) set.labels.push_back({"c", 0, 2});
    const auto out = balance_undersample(set, {});
    std::map<std::string, int> counts;
    for (const auto& l : out.labels) counts[l.appliance_id]++;
    CHECK(counts["a"] == 10);
    CHECK(counts["b"] == 10);
    CHECK(counts["c"] == 10);
}

TEST_CASE("balancing a single class is an error") {
    LabeledEventSet set;
    set.features = MatrixXd::Random(5, 2);
    for (int i = 0; i < 5; ++i) set.labels.push_back({"a", 0, 2});
    CHECK_THROWS_WITH_AS(balance_undersample(set, {}), doctest::Contains("SingleClass"),
                         NilmError);
}

TEST_CASE("scaler maps the training range onto the unit interval") {
    MatrixXd train(3, 1);
    train << 0, 5, 10;
    const auto p = fit_scaler(train);
    const MatrixXd scaled = apply_scaler(p, train);
    CHECK(scaled(0, 0) == doctest::Approx(0.0));
    CHECK(scaled(1, 0) == doctest::Approx(0.5));
    CHECK(scaled(2, 0) == doctest::Approx(1.0));

    MatrixXd outside(1, 1);
    outside << 12;
    CHECK(apply_scaler(p, outside)(0, 0) == doctest::Approx(1.2));
}

TEST_CASE("a degenerate feature maps to zero") {
    MatrixXd train(2, 1);
    train << 7, 7;
    const auto p = fit_scaler(train);
    const MatrixXd scaled = apply_scaler(p, train);
    CHECK(scaled(0, 0) == 0.0);
    CHECK(scaled(1, 0) == 0.0);
}

TEST_CASE("scaler round trip recovers inputs to 1e-9") {
    Rng rng(15);
    MatrixXd train(50, 3);
    for (Index i = 0; i < train.rows(); ++i) {
        train(i, 0) = rng.uniform(-5000, 5000);
        train(i, 1) = rng.uniform(0, 1);
        train(i, 2) = rng.uniform(100, 200);
    }
    const auto p = fit_scaler(train);
    const MatrixXd back = unapply_scaler(p, apply_scaler(p, train));
    CHECK((back - train).cwiseAbs().maxCoeff() <= 1e-9 * 5000);
}

TEST_CASE("fit_scaler rejects an empty matrix") {
    CHECK_THROWS_WITH_AS(fit_scaler(MatrixXd(0, 2)), doctest::Contains("EmptyInput"), NilmError);
}

TEST_CASE("chronological split cuts at the day boundary") {
    HouseDataset ds;
    const Index n = 10 * 1440;
    ds.aggregate_power = {0, 60, ArrayXd::Zero(n), SignalKind::Power};
    ds.aggregate_water = {0, 60, ArrayXd::Zero(n), SignalKind::Water};
    ds.registry = {{"x", {{0, 0, 0}, {2, 1, 2}}, {}}};
    ds.appliance_power = {{0, 60, ArrayXd::LinSpaced(n, 0, n - 1), SignalKind::Power}};
    ds.appliance_water = {{0, 60, ArrayXd::Zero(n), SignalKind::Water}};

    const auto [train, test] = split_train_test(ds, 7, 3);
    CHECK(train.samples() == 7 * 1440);
    CHECK(test.samples() == 3 * 1440);
    CHECK(test.aggregate_power.start_time == 7 * 86400);
    // no shuffling across the boundary
    CHECK(train.appliance_power[0].values[train.samples() - 1] == 7 * 1440 - 1);
    CHECK(test.appliance_power[0].values[0] == 7 * 1440);

    CHECK_THROWS_WITH_AS(split_train_test(ds, 8, 3), doctest::Contains("InsufficientData"),
                         NilmError);
}

TEST_CASE("the published 550/180 split of a 730-day set cuts at day 550") {
    HouseDataset ds;
    const Index n = 730L * 1440L;
    ds.aggregate_power = {0, 60, ArrayXd::Zero(n), SignalKind::Power};
    ds.aggregate_water = {0, 60, ArrayXd::Zero(n), SignalKind::Water};
    const auto [train, test] = split_train_test(ds, 550, 180);
    CHECK(train.samples() == 550L * 1440L);
    CHECK(test.samples() == 180L * 1440L);
    CHECK(test.aggregate_power.start_time == 550L * 86400L);
    CHECK_THROWS_AS(split_train_test(ds, 550, 300), NilmError);
}
