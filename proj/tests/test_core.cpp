#include <doctest.h>

#include <cmath>

#include "aavr/core.hpp"
#include "aavr/rng.hpp"

using namespace aavr;

namespace {

RegionGraph three_regions() {
    Table d(3, 3), t(3, 3);
    const double tau[3][3] = {{0, 4, 6}, {7, 0, 9}, {11, 12, 0}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            t(i, j) = tau[i][j];
            d(i, j) = tau[i][j] / 2.0;
        }
    return RegionGraph::deterministic(d, t);
}

}  // namespace

TEST_CASE("reachability counts pairs within the horizon") {
    const auto g = three_regions();
    CHECK(reachability_fraction(g, {7.0}) == doctest::Approx(6.0 / 9.0));
    CHECK(reachability_fraction(g, {1e-9}) == doctest::Approx(1.0 / 3.0));
    CHECK(reachability_fraction(g, {g.max_travel_time()}) == 1.0);
    CHECK(reachability_fraction(g, {100.0}) == 1.0);
}

TEST_CASE("reachability is nondecreasing in the horizon") {
    const auto g = three_regions();
    double last = 0.0;
    for (int h = 1; h <= 20; ++h) {
        const double r = reachability_fraction(g, {static_cast<double>(h)});
        CHECK(r >= last);
        last = r;
    }
}

TEST_CASE("region graph rejects bad tables") {
    Table d(2, 2), t(2, 2);
    t(0, 1) = 3;
    t(1, 0) = 3;
    CHECK_NOTHROW(RegionGraph::deterministic(d, t));
    Table bad_diag = t;
    bad_diag(1, 1) = 1.0;
    CHECK_THROWS_AS(RegionGraph::deterministic(d, bad_diag), InputError);
    CHECK_THROWS_AS(RegionGraph::deterministic(d, Table(2, 3)), InputError);
    Table negative = t;
    negative(0, 1) = -1;
    CHECK_THROWS_AS(RegionGraph::deterministic(d, negative), InputError);
    CHECK_THROWS_AS(RegionGraph::deterministic(Table(), Table()), InputError);
}

TEST_CASE("graph lookups") {
    const auto g = three_regions();
    CHECK(g.n_regions() == 3);
    CHECK(g.travel_time({1}, {2}) == 9.0);
    CHECK(g.distance({2}, {0}) == 5.5);
    CHECK(g.travel_stddev({0}, {1}) == 0.0);
    CHECK(g.max_distance() == 6.0);
}

TEST_CASE("config validation") {
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    c.horizon.minutes = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.commission_rate = 1.5;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.M = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.mip_relative_gap = 1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("gamma defaults to a large multiple of the longest distance") {
    const auto g = three_regions();
    ScenarioConfig c;
    CHECK(c.gamma_for(g) == doctest::Approx(1e4 * 6.0));
    c.gamma = 3.0;
    CHECK(c.gamma_for(g) == 3.0);
}

TEST_CASE("streams are reproducible and separated") {
    auto a = seeded_rng(42, "demand");
    auto b = seeded_rng(42, "demand");
    auto other_label = seeded_rng(42, "drivers");
    auto other_seed = seeded_rng(43, "demand");
    int same_label = 0, same_seed = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        same_label += x == other_label.next_u64();
        same_seed += x == other_seed.next_u64();
    }
    CHECK(same_label == 0);
    CHECK(same_seed == 0);
    CHECK(stream_key(42, "demand") != stream_key(42, "drivers"));
}

TEST_CASE("distribution draws have the right moments") {
    auto rng = seeded_rng(1, "moments");
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0, sb = 0, sg = 0;
    for (int i = 0; i < n; ++i) {
        su += rng.uniform();
        const double z = rng.normal(3.0, 2.0);
        sn += z;
        sn2 += z * z;
        sb += rng.beta(2.0, 6.0);
        sg += rng.gamma(0.5);
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    const double mean = sn / n;
    CHECK(mean == doctest::Approx(3.0).epsilon(0.01));
    CHECK(std::sqrt(sn2 / n - mean * mean) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(sb / n == doctest::Approx(0.25).epsilon(0.01));
    CHECK(sg / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("categorical and index draws") {
    auto rng = seeded_rng(2, "categorical");
    const double p[] = {0.2, 0.0, 0.8};
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 50000; ++i) ++counts[rng.categorical(p)];
    CHECK(counts[1] == 0);
    CHECK(counts[2] / 50000.0 == doctest::Approx(0.8).epsilon(0.02));
    for (int i = 0; i < 1000; ++i) CHECK(rng.index(7) < 7);
}
