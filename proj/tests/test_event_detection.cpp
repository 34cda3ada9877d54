#include "nilm/event_detection.hpp"
#include "nilm/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace nilm;

namespace {
SampledSeries series(std::initializer_list<double> vals, double step = 60.0) {
    ArrayXd v(static_cast<Index>(vals.size()));
    Index i = 0;
    for (double x : vals) v[i++] = x;
    return {0, step, v, SignalKind::Power};
}
}  // namespace

TEST_CASE("smooth_sma keeps a constant series constant") {
    const auto out = smooth_sma(series({4.0, 4.0, 4.0, 4.0, 4.0}));
    for (Index t = 0; t < out.size(); ++t) CHECK(out.values[t] == doctest::Approx(4.0));
}

TEST_CASE("smooth_sma hand-computed example with prefix rule") {
    const auto out = smooth_sma(series({0, 0, 3, 3, 3}));
    const std::vector<double> expect{0, 0, 1, 2, 3};
    REQUIRE(out.size() == 5);
    for (Index t = 0; t < 5; ++t) CHECK(out.values[t] == doctest::Approx(expect[t]));
}

TEST_CASE("smooth_sma equals the brute-force windowed mean") {
    Rng rng(11);
    ArrayXd v(100);
    for (Index i = 0; i < 100; ++i) v[i] = rng.uniform(0.0, 1000.0);
    const SampledSeries s{0, 60.0, v, SignalKind::Power};
    const auto out = smooth_sma(s);
    for (Index t = 0; t < 100; ++t) {
        double acc = 0.0;
        Index cnt = 0;
        for (Index i = std::max<Index>(0, t - 2); i <= t; ++i) {
            acc += v[i];
            ++cnt;
        }
        CHECK(out.values[t] == doctest::Approx(acc / cnt).epsilon(1e-12));
    }
}

TEST_CASE("smooth_sma rejects short input") {
    CHECK_THROWS_WITH_AS(smooth_sma(series({1, 2})), doctest::Contains("TooShort"), NilmError);
}

TEST_CASE("filter_steady is the identity on a constant series") {
    DetectorConfig cfg{10.0};
    const auto f = filter_steady(series({7, 7, 7, 7, 7, 7}), cfg);
    for (Index t = 0; t < f.size(); ++t) CHECK(f.values[t] == doctest::Approx(7.0));
}

TEST_CASE("filter_steady holds through a noiseless step and settles two samples later") {
    DetectorConfig cfg{10.0};
    // step 0 -> 100 at t=5
    ArrayXd v = ArrayXd::Zero(12);
    for (Index t = 5; t < 12; ++t) v[t] = 100.0;
    const auto f = filter_steady({0, 60.0, v, SignalKind::Power}, cfg);
    for (Index t = 0; t < 7; ++t) CHECK(f.values[t] == doctest::Approx(0.0));
    for (Index t = 7; t < 12; ++t) CHECK(f.values[t] == doctest::Approx(100.0));
}

TEST_CASE("filter_steady tracks the moving average when noise is far below the gate") {
    DetectorConfig cfg{10.0};
    Rng rng(3);
    ArrayXd v(1000);
    for (Index i = 0; i < v.size(); ++i) v[i] = 500.0 + rng.gaussian(0.0, 3.0);
    const SampledSeries s{0, 60.0, v, SignalKind::Power};
    const auto f = filter_steady(s, cfg);
    const auto sma = smooth_sma(s);
    const auto sigma = rolling_sigma(s);
    for (Index t = 1; t < v.size(); ++t) {
        REQUIRE(sigma[t] < cfg.sigma_g);  // gate never closes for this seed
        CHECK(f.values[t] == doctest::Approx(sma.values[t]).epsilon(1e-12));
    }
}

TEST_CASE("filter_steady requires four samples") {
    CHECK_THROWS_WITH_AS(filter_steady(series({1, 2, 3}), DetectorConfig{10.0}),
                         doctest::Contains("TooShort"), NilmError);
}

TEST_CASE("detect_events is silent on a constant filtered series") {
    FilteredSeries f{0, 60.0, ArrayXd::Constant(50, 123.0)};
    CHECK(detect_events(f, DetectorConfig{30.0}).events.empty());
}

TEST_CASE("detect_events reads signed steps off the filtered series") {
    FilteredSeries f{0, 60.0, ArrayXd(6)};
    f.values << 0, 0, 100, 100, 40, 40;
    const auto sig = detect_events(f, DetectorConfig{30.0});
    REQUIRE(sig.events.size() == 2);
    CHECK(sig.events[0].t == 2);
    CHECK(sig.events[0].delta == doctest::Approx(100.0));
    CHECK(sig.events[1].t == 4);
    CHECK(sig.events[1].delta == doctest::Approx(-60.0));
}

TEST_CASE("detect_events agrees with a brute-force scan of consecutive differences") {
    DetectorConfig cfg{25.0};
    Rng rng(17);
    // piecewise-constant multi-appliance style trace
    ArrayXd v(1000);
    double level = 0.0;
    for (Index t = 0; t < v.size(); ++t) {
        if (rng.uniform() < 0.02) level = rng.uniform(0.0, 3000.0);
        v[t] = level;
    }
    FilteredSeries f{0, 60.0, v};
    const auto sig = detect_events(f, cfg);
    std::vector<std::pair<Index, double>> brute;
    for (Index t = DetectorConfig::kWindow - 1; t < v.size(); ++t)
        if (std::abs(v[t] - v[t - 1]) >= cfg.sigma_g) brute.emplace_back(t, v[t] - v[t - 1]);
    REQUIRE(sig.events.size() == brute.size());
    for (std::size_t i = 0; i < brute.size(); ++i) {
        CHECK(sig.events[i].t == brute[i].first);
        CHECK(sig.events[i].delta == doctest::Approx(brute[i].second));
    }
}

TEST_CASE("no false alarms on pure noise at a third of the gate") {
    DetectorConfig cfg{15.0};
    Rng rng(42);
    ArrayXd v(10000);
    for (Index i = 0; i < v.size(); ++i) v[i] = 1000.0 + rng.gaussian(0.0, cfg.sigma_g / 3.0);
    const auto events = detect_events(filter_steady({0, 60, v, SignalKind::Power}, cfg), cfg);
    CHECK(events.events.empty());
}

TEST_CASE("every injected step of at least 3 sigma_g yields exactly one nearby event") {
    DetectorConfig cfg{15.0};
    Rng rng(5);
    ArrayXd v = ArrayXd::Zero(4000);
    std::vector<Index> inject;
    double level = 0.0;
    Index t = 10;
    while (t < 3900) {
        const double delta = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(45.0, 2000.0);
        if (level + delta >= 0.0) {
            level += delta;
            inject.push_back(t);
        }
        for (Index i = t; i < v.size(); ++i) v[i] = level;
        t += 6 + static_cast<Index>(rng.below(30));
    }
    const auto sig = detect_events(filter_steady({0, 60, v, SignalKind::Power}, cfg), cfg);
    REQUIRE(sig.events.size() == inject.size());
    for (std::size_t i = 0; i < inject.size(); ++i)
        CHECK(std::abs(sig.events[i].t - inject[i]) <= 2);
}

TEST_CASE("event deltas of a trace returning to zero sum to zero") {
    DetectorConfig cfg{15.0};
    ArrayXd v = ArrayXd::Zero(300);
    auto pulse = [&](Index a, Index b, double amp) {
        for (Index i = a; i < b; ++i) v[i] += amp;
    };
    pulse(20, 60, 4500);
    pulse(80, 180, 1400);
    pulse(100, 140, 340);
    const auto sig = detect_events(filter_steady({0, 60, v, SignalKind::Power}, cfg), cfg);
    double sum = 0.0;
    for (const auto& e : sig.events) sum += e.delta;
    CHECK(std::abs(sum) <= cfg.sigma_g);
}

TEST_CASE("re-filtering the filter output only touches post-edge transients") {
    DetectorConfig cfg{15.0};
    ArrayXd v = ArrayXd::Zero(200);
    for (Index i = 40; i < 120; ++i) v[i] = 600.0;
    for (Index i = 150; i < 180; ++i) v[i] = 2000.0;
    const auto once = filter_steady({0, 60, v, SignalKind::Power}, cfg);
    const auto twice = filter_steady(once.as_series(), cfg);

    std::vector<Index> edges;
    for (Index t = 1; t < once.size(); ++t)
        if (once.values[t] != once.values[t - 1]) edges.push_back(t);
    // run levels preserved
    for (Index t = 0; t < once.size(); ++t) {
        bool near_edge = false;
        for (Index e : edges) near_edge |= t >= e && t < e + DetectorConfig::kWindow - 1;
        if (!near_edge) CHECK(twice.values[t] == doctest::Approx(once.values[t]));
    }
    // and the same set of steady levels appears in both
    const auto ev_once = detect_events(once, cfg);
    const auto ev_twice = detect_events(twice, cfg);
    REQUIRE(ev_once.events.size() == ev_twice.events.size());
    for (std::size_t i = 0; i < ev_once.events.size(); ++i)
        CHECK(ev_twice.events[i].delta == doctest::Approx(ev_once.events[i].delta));
}

TEST_CASE("filter_steady is exactly idempotent on steady data") {
    DetectorConfig cfg{15.0};
    const auto once = filter_steady(series({9, 9, 9, 9, 9, 9, 9, 9}), cfg);
    const auto twice = filter_steady(once.as_series(), cfg);
    for (Index t = 0; t < once.size(); ++t) CHECK(twice.values[t] == once.values[t]);
}

TEST_CASE("estimate_sigma_g is zero for a noiseless constant and rejected by the config") {
    const auto s = SampledSeries{0, 60, ArrayXd::Constant(200, 42.0), SignalKind::Power};
    const double est = estimate_sigma_g(s);
    CHECK(est == 0.0);
    DetectorConfig cfg{est};
    CHECK_THROWS_AS(cfg.validate(), NilmError);
}

TEST_CASE("estimate_sigma_g recovers the noise scale before the safety factor") {
    Rng rng(123);
    ArrayXd v(5000);
    for (Index i = 0; i < v.size(); ++i) v[i] = 800.0 + rng.gaussian(0.0, 5.0);
    const double est = estimate_sigma_g({0, 60, v, SignalKind::Power}, 0.5, 1.0);
    CHECK(est >= 4.0);
    CHECK(est <= 6.0);
}

TEST_CASE("estimate_sigma_g is driven by quiet segments, not steps") {
    Rng rng(9);
    ArrayXd v(2000);
    double level = 100.0;
    const double min_step = 500.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (i % 100 == 0) level = level > 100.0 ? 100.0 : 100.0 + min_step + rng.uniform(0.0, 1500.0);
        v[i] = level + rng.gaussian(0.0, 4.0);
    }
    const double est = estimate_sigma_g({0, 60, v, SignalKind::Power}, 0.5, 3.0);
    CHECK(est < min_step / 3.0);
    CHECK(est > 0.0);
}

TEST_CASE("estimate_sigma_g needs at least 100 samples") {
    CHECK_THROWS_WITH_AS(
        estimate_sigma_g({0, 60, ArrayXd::Constant(99, 1.0), SignalKind::Power}),
        doctest::Contains("TooShort"), NilmError);
}
