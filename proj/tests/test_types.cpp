#include "nilm/data_io.hpp"
#include "nilm/rng.hpp"
#include "nilm/types.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace nilm;

TEST_CASE("validate_series accepts a constant series") {
    SampledSeries s{0, 60.0, ArrayXd::Constant(3, 5.0), SignalKind::Power};
    CHECK(validate_series(s).ok());
}

TEST_CASE("validate_series reports the NaN index") {
    ArrayXd v(4);
    v << 1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 4.0;
    SampledSeries s{0, 60.0, v, SignalKind::Power};
    const auto c = validate_series(s);
    CHECK(c.defect == SeriesDefect::NonFinite);
    CHECK(c.index == 2);
}

TEST_CASE("validate_series rejects empty values") {
    SampledSeries s{0, 60.0, ArrayXd(), SignalKind::Power};
    CHECK(validate_series(s).defect == SeriesDefect::EmptySeries);
}

TEST_CASE("validate_series rejects negatives and bad step") {
    ArrayXd v(2);
    v << 1.0, -0.5;
    CHECK(validate_series({0, 60.0, v, SignalKind::Power}).defect ==
          SeriesDefect::NegativeValue);
    CHECK(validate_series({0, 0.0, v, SignalKind::Power}).defect ==
          SeriesDefect::NonPositiveStep);
}

TEST_CASE("dense/sparse round trip reproduces the event list exactly") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        EventSignal sig;
        sig.domain_len = 200;
        Index t = 1;
        while (true) {
            t += 1 + static_cast<Index>(rng.below(20));
            if (t >= sig.domain_len) break;
            sig.events.push_back({t, rng.uniform(-5000.0, 5000.0)});
        }
        const EventSignal back = EventSignal::from_dense(sig.to_dense());
        REQUIRE(back.events.size() == sig.events.size());
        for (std::size_t i = 0; i < sig.events.size(); ++i) {
            CHECK(back.events[i].t == sig.events[i].t);
            CHECK(back.events[i].delta == sig.events[i].delta);
        }
    }
}

TEST_CASE("mode catalogue matches the published ranges") {
    const auto reg = table1_registry();
    auto find = [&](const std::string& id) -> const ApplianceSpec& {
        for (const auto& s : reg)
            if (s.id == id) return s;
        REQUIRE(false);
        return reg.front();
    };
    auto band = [](const ApplianceSpec& s, int mode, double lo, double hi) {
        const ApplianceMode* m = s.find_mode(mode);
        REQUIRE(m != nullptr);
        CHECK(m->power_low == lo);
        CHECK(m->power_high == hi);
    };
    band(find("fridge"), 2, 100, 200);
    band(find("fridge"), 3, 400, 500);
    band(find("dryer"), 2, 4000, 5000);
    band(find("dishwasher"), 2, 100, 200);
    band(find("dishwasher"), 3, 700, 800);
    band(find("heat_pump"), 2, 1000, 1850);
    band(find("oven"), 2, 3400, 3550);
    band(find("basement"), 2, 330, 350);
    band(find("washing_machine"), 2, 100, 250);
    band(find("washing_machine"), 3, 400, 700);
    for (const auto& s : reg) {
        CHECK_NOTHROW(s.validate());
        band(s, 0, 0, 0);
    }
}

TEST_CASE("ApplianceSpec validation rejects malformed specs") {
    ApplianceSpec no_off{"x", {{2, 100, 200}}, {}};
    CHECK_THROWS_WITH_AS(no_off.validate(), doctest::Contains("InvalidSpec"), NilmError);
    ApplianceSpec inverted{"x", {{0, 0, 0}, {2, 300, 200}}, {}};
    CHECK_THROWS_AS(inverted.validate(), NilmError);
}

TEST_CASE("transition ids round-trip (from, to) pairs") {
    for (int from = 0; from < 4; ++from)
        for (int to = 0; to < 4; ++to) {
            const auto [f, t] = decode_transition(encode_transition(from, to));
            CHECK(f == from);
            CHECK(t == to);
        }
}

TEST_CASE("mode_for_level picks containing band, nearest midpoint otherwise") {
    const auto reg = table1_registry();
    const ApplianceSpec& fridge = reg.front();
    CHECK(fridge.mode_for_level(0.0) == 0);
    CHECK(fridge.mode_for_level(150.0) == 2);
    CHECK(fridge.mode_for_level(450.0) == 3);
    CHECK(fridge.mode_for_level(300.0) == 2);  // nearer 150 than 450
    CHECK(fridge.mode_for_level(380.0) == 3);
}

TEST_CASE("LabeledEventSet consistency check") {
    LabeledEventSet set;
    set.features = MatrixXd::Zero(2, 2);
    set.labels = {EventLabel::unknown()};
    CHECK_THROWS_AS(set.check_consistent(), NilmError);
}
