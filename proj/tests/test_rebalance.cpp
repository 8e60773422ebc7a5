#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aavr/rebalance.hpp"
#include "aavr/rng.hpp"
#include "aavr/scenarios.hpp"
#include "oracles.hpp"

using namespace aavr;
using namespace aavr::rebalance;

namespace {

FleetSnapshot two_stations(std::size_t n, double mu, std::vector<double> L, std::vector<double> nu,
                           double minutes = 4.0) {
    Table d(2, 2), t(2, 2);
    d(0, 1) = d(1, 0) = 2.0;
    t(0, 1) = t(1, 0) = minutes;
    FleetSnapshot s{{}, std::move(nu), RegionGraph::deterministic(d, t), {5.0}, {}};
    for (std::size_t c = 0; c < n; ++c) s.drivers.push_back({DriverId{c}, RegionId{0}, mu, L});
    return s;
}

FleetSnapshot case_snapshot(const ScenarioBundle& b) {
    return pinned_snapshot(b, b.demand.mean_at(b.start_minute));
}

std::vector<std::size_t> movers(const RecommendationPlan& p, const FleetSnapshot& s) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < s.drivers.size(); ++c)
        if (p.destination[c] != s.drivers[c].region) out.push_back(c);
    return out;
}

}  // namespace

TEST_CASE("model names") {
    CHECK(parse_model("AAVR") == Model::aavr);
    CHECK(parse_model("b3") == Model::b3);
    CHECK(to_string(Model::b4) == "b4");
    CHECK_THROWS_AS(parse_model("b5"), InputError);
}

TEST_CASE("case study 1 recommendation counts") {
    const auto s = case_snapshot(case_study_1());
    CHECK(recommend(Model::aavr, s).recommended_to({1}, s) == 200);
    CHECK(recommend(Model::b1, s).recommended_to({1}, s) == 500);
    CHECK(recommend(Model::b2, s).recommended_to({1}, s) == 1000);
    CHECK(recommend(Model::b3, s).recommended_to({1}, s) == 1000);
    CHECK(recommend(Model::b4, s).recommended_to({1}, s) == 100);
    const auto zero = case_snapshot(case_study_1(0.0));
    CHECK(recommend(Model::b1, zero).recommended_to({1}, zero) == 100);
}

TEST_CASE("aavr expected allocation equals the program's Z") {
    const auto s = case_snapshot(case_study_1());
    const auto plan = solve_aavr(s);
    CHECK(plan.expected_supply[1] == doctest::Approx(100.0));
    CHECK(plan.expected_allocation[1] == doctest::Approx(100.0));
    const auto dp = build_aavr(s);
    const auto sol = milp::solve_milp(dp.program);
    REQUIRE(sol.optimal());
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(sol.values[dp.z[j]] - plan.expected_allocation[j]) <= 1e-6);
}

TEST_CASE("case study 2: aavr stays, baselines unchanged") {
    const auto s1 = case_snapshot(case_study_1());
    const auto s2 = case_snapshot(case_study_2());
    CHECK(recommend(Model::aavr, s2).moves(s2) == 0);
    for (Model m : {Model::b1, Model::b2, Model::b3, Model::b4}) {
        CHECK(recommend(m, s2).destination == recommend(m, s1).destination);
    }
    double passive = 0.0;
    for (const auto& d : s2.drivers) passive += (1 - d.mu) * d.preference[1];
    CHECK(passive == doctest::Approx(250.0));
}

TEST_CASE("case study 3: the most confident drivers are chosen") {
    const auto s = case_snapshot(case_study_3(7));
    const auto plan = solve_aavr(s);
    std::vector<double> mu;
    for (const auto& d : s.drivers) mu.push_back(d.mu);
    const auto expected = oracle::greedy_mu_prefix(mu, 100.0, s.config.beta * 4.0);
    const auto got = movers(plan, s);
    CHECK(got == expected);
    CHECK(got.size() < 200);
    double sel = 0, all = 0;
    for (std::size_t c : got) sel += mu[c];
    for (double m : mu) all += m;
    CHECK(sel / got.size() > all / mu.size());
}

TEST_CASE("problem 2 optimum equals brute force over assignments") {
    auto rng = seeded_rng(55, "linearization");
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t R = 2 + rng.index(2);
        const std::size_t C = 1 + rng.index(8);
        oracle::FleetCase f;
        f.beta = rng.bernoulli(0.5) ? 0.01 : 1e-4;
        f.tau.assign(R, std::vector<double>(R, 0.0));
        Table d(R, R), t(R, R);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < R; ++j)
                if (i != j) {
                    t(i, j) = f.tau[i][j] = static_cast<double>(1 + rng.index(8));
                    d(i, j) = t(i, j) / 2.0;
                }
        FleetSnapshot s{{}, {}, RegionGraph::deterministic(d, t), {5.0}, {}};
        s.config.beta = f.beta;
        for (std::size_t j = 0; j < R; ++j) f.nu.push_back(std::round(rng.uniform(0, 4) * 4) / 4);
        s.nu = f.nu;
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t r = rng.index(R);
            const double mu = rng.uniform();
            std::vector<double> L(R);
            double tot = 0;
            for (auto& v : L) tot += v = rng.uniform();
            for (auto& v : L) v /= tot;
            f.region.push_back(r);
            f.mu.push_back(mu);
            f.pref.push_back(L);
            s.drivers.push_back({DriverId{c}, RegionId{r}, mu, L});
        }
        const double best = oracle::best_assignment(f);
        const auto sol = milp::solve_milp(build_aavr(s).program);
        REQUIRE(sol.optimal());
        CHECK(std::abs(sol.objective_value - best) <= 1e-6);

        const auto plan = solve_aavr(s);
        std::vector<std::size_t> dest;
        for (const auto& r : plan.destination) dest.push_back(r.index);
        CHECK(std::abs(oracle::assignment_value(f, dest) - best) <= 1e-6);
    }
}

TEST_CASE("b1 with no demand recommends nothing") {
    const auto s = two_stations(20, 0.5, {1, 0}, {0, 0});
    const auto plan = solve_b1(s);
    CHECK(plan.moves(s) == 0);
    CHECK(plan.objective_value == doctest::Approx(0.0));
}

TEST_CASE("b2 splits drivers in proportion to demand") {
    auto s = two_stations(10, 0.5, {1, 0}, {50, 50});
    s.config.beta = 0.0;
    CHECK(solve_b2(s).recommended_to({1}, s) == 5);

    auto p = two_stations(10, 0.5, {1, 0}, {100, 0});
    p.config.beta = 0.0;
    const auto plan = solve_b2(p);
    CHECK(plan.moves(p) == 0);
    CHECK(plan.objective_value == doctest::Approx(0.0));
}

TEST_CASE("b3 balances supply to the demand shares") {
    auto s = two_stations(0, 0.5, {1, 0}, {75, 25});
    for (std::size_t c = 0; c < 100; ++c) s.drivers.push_back({DriverId{c}, RegionId{c < 20 ? 0u : 1u}, 0.5, {1, 0}});
    const auto flow = solve_b3(s);
    CHECK(flow.at(1, 0) == 55);
    CHECK(flow.at(0, 1) == 0);

    auto q = two_stations(0, 0.5, {1, 0}, {30, 70});
    for (std::size_t c = 0; c < 10; ++c) q.drivers.push_back({DriverId{c}, RegionId{c < 3 ? 0u : 1u}, 0.5, {1, 0}});
    CHECK(solve_b3(q).total_moves() == 0);
}

TEST_CASE("b3 targets stay integral with fractional shares") {
    Table d(3, 3, 1.0), t(3, 3, 2.0);
    for (std::size_t i = 0; i < 3; ++i) d(i, i) = t(i, i) = 0.0;
    FleetSnapshot s{{}, {1, 1, 1}, RegionGraph::deterministic(d, t), {5.0}, {}};
    for (std::size_t c = 0; c < 10; ++c) s.drivers.push_back({DriverId{c}, RegionId{0}, 0.5, {1, 0, 0}});
    const auto flow = solve_b3(s);
    CHECK(flow.outflow(0) == 6);
}

TEST_CASE("b4 edge cases") {
    auto none = two_stations(10, 0.5, {1, 0}, {0, 0});
    CHECK(solve_b4(none).total_moves() == 0);
    auto free = two_stations(10, 0.5, {1, 0}, {0, 5});
    free.config.gamma = 0.0;
    CHECK(solve_b4(free).total_moves() == 0);
    auto big = two_stations(10, 0.5, {1, 0}, {0, 5});
    CHECK(solve_b4(big).at(0, 1) == 5);
}

TEST_CASE("flows to drivers") {
    const auto s = two_stations(1000, 0.5, {1, 0}, {0, 100});
    AggregateFlow flow(2);
    CHECK(flows_to_drivers(flow, s).moves(s) == 0);
    flow.at(0, 1) = 100;
    const auto plan = flows_to_drivers(flow, s);
    for (std::size_t c = 0; c < 1000; ++c) CHECK(plan.destination[c] == RegionId{c < 100 ? 1u : 0u});
    flow.at(0, 1) = 1000;
    CHECK(flows_to_drivers(flow, s).moves(s) == 1000);
    flow.at(0, 1) = 1001;
    CHECK_THROWS_AS(flows_to_drivers(flow, s), ScenarioError);
}

TEST_CASE("snapshot validation") {
    auto s = two_stations(3, 0.5, {1, 0}, {0, 1});
    s.drivers[1].mu = 1.5;
    CHECK_THROWS_AS(solve_aavr(s), InputError);
    auto t = two_stations(3, 0.5, {0.7, 0.7}, {0, 1});
    CHECK_THROWS_AS(solve_b1(t), InputError);
    auto u = two_stations(3, 0.5, {1, 0}, {0, 1, 2});
    CHECK_THROWS_AS(build_b3(u), InputError);
}

TEST_CASE("unreachable destinations are never recommended") {
    const auto s = two_stations(50, 0.9, {1, 0}, {0, 40}, 6.0);
    for (Model m : {Model::aavr, Model::b1, Model::b2}) CHECK(recommend(m, s).moves(s) == 0);
}

TEST_CASE("program export covers every model") {
    const auto s = two_stations(4, 0.5, {1, 0}, {0, 2});
    for (Model m : kAllModels) {
        const auto lp = build_program(m, s);
        CHECK(lp.n_vars() > 0);
        CHECK(milp::to_lp_format(lp).find("End") != std::string::npos);
    }
    std::ostringstream out;
    const auto plan = solve_aavr(s);
    write_plan_csv(out, plan, s);
    CHECK(out.str().rfind("driver_id", 0) == 0);
}
