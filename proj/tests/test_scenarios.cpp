#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aavr/scenarios.hpp"
#include "aavr/serialize.hpp"

using namespace aavr;

namespace {

TripIngest ingest(const std::string& rows, std::size_t n_regions = 0) {
    std::istringstream in("pickup_region,dropoff_region,minutes,km,hour,weekday\n" + rows);
    IngestOptions opt;
    opt.n_regions = n_regions;
    return ingest_trip_records(in, "trips.csv", opt);
}

}  // namespace

TEST_CASE("case study bundles") {
    const auto b = case_study_1();
    CHECK(b.drivers.size() == 1000);
    CHECK(b.graph.travel_time({0}, {1}) == 4.0);
    CHECK(b.demand.mean_at(0.0) == std::vector<double>{0.0, 100.0});
    CHECK(*b.drivers[5].pinned_mu == 0.5);
    CHECK(*case_study_2().drivers[0].pinned_preference == std::vector<double>{0.5, 0.5});
    const auto c = case_study_3(7);
    const auto d = case_study_3(7);
    for (std::size_t i = 0; i < c.drivers.size(); ++i) CHECK(*c.drivers[i].pinned_mu == *d.drivers[i].pinned_mu);
    CHECK(*case_study_3(8).drivers[0].pinned_mu != *c.drivers[0].pinned_mu);
    CHECK_THROWS_AS(case_study_1(-1.0), InputError);
}

TEST_CASE("small synthetic network") {
    const auto b = synthetic_network(2, 10, 1);
    CHECK_NOTHROW(b.validate());
    CHECK(b.graph.travel_time({0}, {1}) == b.graph.travel_time({1}, {0}));
    CHECK(b.drivers.size() == 10);
    CHECK_THROWS_AS(synthetic_network(1, 10, 1), InputError);
}

TEST_CASE("synthetic network is reproducible") {
    const auto a = synthetic_network(6, 40, 12);
    const auto b = synthetic_network(6, 40, 12);
    CHECK(io::bundle_to_json(a) == io::bundle_to_json(b));
    CHECK(io::bundle_to_json(a) != io::bundle_to_json(synthetic_network(6, 40, 13)));
}

TEST_CASE("desk-scale network construction") {
    const auto b = synthetic_network(10, 100, 7);
    const std::size_t R = b.n_regions();
    REQUIRE(R == 10);
    for (std::size_t i = 0; i < R; ++i) {
        double od = 0;
        for (std::size_t j = 0; j < R; ++j) {
            od += b.od(i, j);
            if (i != j) CHECK(b.graph.travel_time({i}, {j}) > 0.0);
            for (std::size_t k = 0; k < R; ++k) {
                CHECK(b.graph.travel_time({i}, {j}) <=
                      b.graph.travel_time({i}, {k}) + b.graph.travel_time({k}, {j}) + 1e-9);
                CHECK(b.graph.distance({i}, {j}) <= b.graph.distance({i}, {k}) + b.graph.distance({k}, {j}) + 1e-9);
            }
        }
        CHECK(od == doctest::Approx(1.0));
    }
    CHECK_FALSE(b.history.regions.empty());
    for (const auto& d : b.drivers) {
        CHECK(d.belief_system == behavior::BetaBelief{1, 1});
        CHECK(d.belief_self == behavior::BetaBelief{1, 1});
    }
}

TEST_CASE("demand profile slots wrap") {
    DemandProfile p;
    p.mean = Table(1, 3);
    p.mean(0, 0) = 1;
    p.mean(0, 1) = 2;
    p.mean(0, 2) = 3;
    p.stddev = {0};
    CHECK(p.slot_at(0) == 0);
    CHECK(p.slot_at(61) == 1);
    CHECK(p.mean_at(190)[0] == 1.0);
}

TEST_CASE("pinned snapshot needs pinned drivers") {
    CHECK(pinned_snapshot(case_study_1(), {0, 100}).drivers.size() == 1000);
    CHECK_THROWS_AS(pinned_snapshot(synthetic_network(3, 5, 1), {1, 1, 1}), InputError);
}

TEST_CASE("planted corpus") {
    const behavior::PreferenceModel m{{2, -1, 0.5, 0}};
    const auto c = planted_decision_corpus(m, 10, 5, 3, 4);
    REQUIRE(c.size() == 50);
    for (const auto& r : c) {
        CHECK(r.decision.regions.size() == 3);
        CHECK(r.decision.chosen < 3);
        CHECK(r.decision.regions[0].values.size() == 3);
    }
    CHECK_THROWS_AS(planted_decision_corpus(m, 1, 1, 1, 4), InputError);
}

TEST_CASE("ingest: a single trip") {
    const auto t = ingest("0,1,10,4,8,2\n");
    CHECK(t.graph.travel_time({0}, {1}) == 10.0);
    CHECK(t.graph.travel_stddev({0}, {1}) == 0.0);
    CHECK(t.rows == 1);
}

TEST_CASE("ingest: sample statistics") {
    const auto t = ingest("0,1,8,4,8,2\n0,1,12,4,9,2\n1,0,5,3,9,2\n");
    CHECK(t.graph.travel_time({0}, {1}) == doctest::Approx(10.0));
    CHECK(t.graph.travel_stddev({0}, {1}) == doctest::Approx(2.0));
    CHECK(t.od(0, 1) == 1.0);
    CHECK(t.fallback_pairs == 0);
}

TEST_CASE("ingest: missing pairs fall back with a warning") {
    const auto t = ingest("0,1,8,4,8,2\n", 3);
    CHECK(t.fallback_pairs == 5);
    CHECK(t.warnings.size() >= 5);
    CHECK(t.graph.travel_time({0}, {2}) > 0.0);
    CHECK(t.graph.travel_time({1}, {0}) == 8.0);
}

TEST_CASE("ingest: malformed rows are skipped") {
    const auto t = ingest("0,1,8,4,8,2\nx,1,2,3,4,5\n0,1,-3,1,1,1\n0,1\n");
    CHECK(t.rows == 4);
    CHECK(t.skipped_rows == 3);
    CHECK_THROWS_AS(ingest("bad,row,a,b,c,d\n"), ScenarioError);
    std::istringstream missing("pickup_region,minutes\n0,1\n");
    CHECK_THROWS_AS(ingest_trip_records(missing, "m.csv"), ScenarioError);
}

TEST_CASE("ingest: hourly demand history") {
    const auto t = ingest("0,1,8,4,8,2\n0,1,9,4,8,2\n1,0,5,3,9,2\n");
    REQUIRE(t.history.n_regions() == 2);
    double total = 0;
    for (const auto& r : t.history.regions[0]) total += r.demand;
    CHECK(total == 2.0);
}
