#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nns/timeline.hpp"

using namespace nns;

TEST_CASE("binarize hand examples") {
    EventTrack t{{{2.0, 3.0, {}}}, 5.0};
    BinaryTimeline b = binarize(t, 10.0);
    REQUIRE(b.bits.size() == 1);
    CHECK(b.bits[0] == 1);

    EventTrack empty{{}, 60.0};
    b = binarize(empty, 0.1);
    REQUIRE(b.bits.size() == 600);
    for (uint8_t bit : b.bits) CHECK(bit == 0);

    EventTrack t2{{{0.95, 1.05, {}}}, 2.0};
    b = binarize(t2, 0.1);
    REQUIRE(b.bits.size() == 20);
    for (size_t k = 0; k < b.bits.size(); ++k) CHECK(b.bits[k] == (k == 9 || k == 10 ? 1 : 0));
}

TEST_CASE("binarize keeps the final partial window") {
    EventTrack t{{{5.9, 6.3, {}}}, 6.3};
    BinaryTimeline b = binarize(t, 1.0);
    REQUIRE(b.bits.size() == 7);  // ceil(6.3)
    CHECK(b.bits[5] == 1);
    CHECK(b.bits[6] == 1);
}

TEST_CASE("binarize zero-length boundary touch does not count") {
    // Event ends exactly at a window boundary: the next window stays 0.
    EventTrack t{{{0.0, 1.0, {}}}, 3.0};
    BinaryTimeline b = binarize(t, 1.0);
    CHECK(b.bits == std::vector<uint8_t>{1, 0, 0});
}

TEST_CASE("binarize rejects non-positive window") {
    EventTrack t{{}, 5.0};
    CHECK_THROWS_AS(binarize(t, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(binarize(t, -1.0), std::invalid_argument);
}

TEST_CASE("binarize is monotone under event insertion") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        EventTrack t{{}, 60.0};
        double cursor = 0.0;
        int n = int(rng() % 4);
        for (int i = 0; i < n; ++i) {
            double s = cursor + u(rng) / 10.0, e = s + 0.1 + u(rng) / 25.0;
            if (e > 60.0) break;
            t.events.push_back({s, e, {}});
            cursor = e;
        }
        double extra_s = cursor + 0.5, extra_e = extra_s + 1.0;
        if (extra_e > 60.0) continue;
        EventTrack t2 = t;
        t2.events.push_back({extra_s, extra_e, {}});
        BinaryTimeline a = binarize(t, 0.7), b = binarize(t2, 0.7);
        for (size_t k = 0; k < a.bits.size(); ++k) CHECK(a.bits[k] <= b.bits[k]);
    }
}

TEST_CASE("interval_iou hand examples") {
    CHECK(interval_iou({0, 10, {}}, {0, 10, {}}) == doctest::Approx(1.0));
    CHECK(interval_iou({0, 10, {}}, {20, 30, {}}) == 0.0);
    CHECK(interval_iou({0, 10, {}}, {5, 15, {}}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("interval_iou symmetry, identity and shift invariance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int trial = 0; trial < 500; ++trial) {
        double a0 = u(rng), a1 = a0 + 0.01 + u(rng);
        double b0 = u(rng), b1 = b0 + 0.01 + u(rng);
        Event a{a0, a1, {}}, b{b0, b1, {}};
        double iou = interval_iou(a, b);
        CHECK(iou == interval_iou(b, a));
        CHECK(iou >= 0.0);
        CHECK(iou <= 1.0);
        CHECK((iou == 1.0) == (a0 == b0 && a1 == b1));
        double shift = u(rng);
        Event as{a0 + shift, a1 + shift, {}}, bs{b0 + shift, b1 + shift, {}};
        CHECK(interval_iou(as, bs) == doctest::Approx(iou).epsilon(1e-12));
    }
}

TEST_CASE("extract_events hand examples") {
    EventTrack t = extract_events({1, 1, 1, 0, 0}, 0.5, 0.0, 0.0);
    REQUIRE(t.events.size() == 1);
    CHECK(t.events[0].start_s == doctest::Approx(0.0));
    CHECK(t.events[0].end_s == doctest::Approx(1.5));

    t = extract_events({1, 0, 1}, 0.5, 1.0, 0.0);
    REQUIRE(t.events.size() == 1);
    CHECK(t.events[0].start_s == doctest::Approx(0.0));
    CHECK(t.events[0].end_s == doctest::Approx(1.5));

    t = extract_events({1, 0, 0, 0, 1}, 0.5, 1.0, 0.0);
    REQUIRE(t.events.size() == 2);
    CHECK(t.events[0].end_s == doctest::Approx(0.5));
    CHECK(t.events[1].start_s == doctest::Approx(2.0));
    CHECK(t.events[1].end_s == doctest::Approx(2.5));
}

TEST_CASE("extract_events / binarize round-trip") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<uint8_t> labels(20);
        for (auto& l : labels) l = uint8_t(rng() & 1);
        EventTrack t = extract_events(labels, 0.5, 0.0, 0.0);
        t.validate();
        BinaryTimeline b = binarize(t, 0.5);
        REQUIRE(b.bits.size() == labels.size());
        CHECK(b.bits == labels);
    }
}

TEST_CASE("extract_events count non-increasing in merge_gap and min_duration") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<uint8_t> labels(30);
        for (auto& l : labels) l = uint8_t(rng() & 1);
        size_t prev = SIZE_MAX;
        for (double gap : {0.0, 0.5, 1.0, 2.0}) {
            size_t n = extract_events(labels, 0.5, gap, 0.0).events.size();
            CHECK(n <= prev);
            prev = n;
        }
        prev = SIZE_MAX;
        for (double mind : {0.0, 0.5, 1.0, 2.0}) {
            size_t n = extract_events(labels, 0.5, 0.0, mind).events.size();
            CHECK(n <= prev);
            prev = n;
        }
    }
}

TEST_CASE("EventTrack::validate rejects bad tracks") {
    EventTrack overlap{{{0.0, 2.0, {}}, {1.0, 3.0, {}}}, 5.0};
    CHECK_THROWS_AS(overlap.validate(), std::invalid_argument);
    EventTrack unsorted{{{3.0, 4.0, {}}, {0.0, 1.0, {}}}, 5.0};
    CHECK_THROWS_AS(unsorted.validate(), std::invalid_argument);
    EventTrack outside{{{0.0, 6.0, {}}}, 5.0};
    CHECK_THROWS_AS(outside.validate(), std::invalid_argument);
    EventTrack ok{{{0.0, 1.0, {}}, {1.0, 2.0, {}}}, 5.0};  // touching is allowed
    CHECK_NOTHROW(ok.validate());
}
