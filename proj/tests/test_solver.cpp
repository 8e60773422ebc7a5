#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aavr/core.hpp"
#include "aavr/milp.hpp"
#include "aavr/rng.hpp"
#include "oracles.hpp"

using namespace aavr;
using namespace aavr::milp;

namespace {

LinearProgram from_dense(const oracle::DenseLp& d) {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    for (std::size_t i = 0; i < d.c.size(); ++i)
        lp.add_variable("x" + std::to_string(i), d.lo[i], d.hi[i], VarType::continuous, d.c[i]);
    for (std::size_t r = 0; r < d.A.size(); ++r) {
        std::vector<Term> row;
        for (std::size_t i = 0; i < d.c.size(); ++i) row.push_back({static_cast<int>(i), d.A[r][i]});
        lp.add_constraint("r" + std::to_string(r), row, Relation::less_equal, d.b[r]);
    }
    return lp;
}

LinearProgram from_binary(const oracle::BinaryProgram& p) {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    for (std::size_t i = 0; i < p.c.size(); ++i) lp.add_variable("b" + std::to_string(i), 0, 1, VarType::binary, p.c[i]);
    for (std::size_t r = 0; r < p.A.size(); ++r) {
        std::vector<Term> row;
        for (std::size_t i = 0; i < p.c.size(); ++i)
            if (p.A[r][i] != 0.0) row.push_back({static_cast<int>(i), p.A[r][i]});
        const Relation rel = p.relation[r] < 0 ? Relation::less_equal
                             : p.relation[r] > 0 ? Relation::greater_equal
                                                 : Relation::equal;
        lp.add_constraint("r" + std::to_string(r), row, rel, p.b[r]);
    }
    return lp;
}

oracle::BinaryProgram random_binary(RandomStream& rng, std::size_t n) {
    oracle::BinaryProgram p;
    for (std::size_t i = 0; i < n; ++i) p.c.push_back(static_cast<double>(rng.index(21)) - 5.0);
    const std::size_t m = 1 + rng.index(4);
    for (std::size_t r = 0; r < m; ++r) {
        std::vector<double> a(n);
        double total = 0.0;
        for (auto& v : a) {
            v = static_cast<double>(rng.index(11)) - 2.0;
            total += std::max(v, 0.0);
        }
        p.A.push_back(a);
        const std::size_t kind = rng.index(6);
        if (kind == 0) {
            p.relation.push_back(1);
            p.b.push_back(std::floor(0.3 * total));
        } else if (kind == 1 && r == 0) {
            p.relation.push_back(0);
            p.b.push_back(std::floor(0.4 * total));
        } else {
            p.relation.push_back(-1);
            p.b.push_back(std::floor(0.5 * total));
        }
    }
    return p;
}

}  // namespace

TEST_CASE("lp: single bounded variable") {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    const int x = lp.add_variable("x", 0, kInfinity, VarType::continuous, 1.0);
    lp.add_constraint("cap", {{x, 1.0}}, Relation::less_equal, 3.0);
    const auto s = solve_lp(lp);
    REQUIRE(s.optimal());
    CHECK(s.values[0] == doctest::Approx(3.0));
}

TEST_CASE("lp: degenerate tie accepts either vertex") {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    const int x = lp.add_variable("x", 0, kInfinity, VarType::continuous, 1.0);
    const int y = lp.add_variable("y", 0, kInfinity, VarType::continuous, 1.0);
    lp.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, Relation::less_equal, 1.0);
    const auto s = solve_lp(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(1.0));
    CHECK(s.values[0] + s.values[1] == doctest::Approx(1.0));
}

TEST_CASE("lp: infeasible and unbounded") {
    LinearProgram a;
    const int x = a.add_variable("x", 0, kInfinity, VarType::continuous, 1.0);
    a.add_constraint("lo", {{x, 1.0}}, Relation::greater_equal, 2.0);
    a.add_constraint("hi", {{x, 1.0}}, Relation::less_equal, 1.0);
    CHECK(solve_lp(a).status == Status::infeasible);

    LinearProgram b;
    b.add_variable("x", 0, kInfinity, VarType::continuous, 1.0);
    CHECK(solve_lp(b).status == Status::unbounded);
}

TEST_CASE("lp: random 5-variable programs match vertex enumeration") {
    auto rng = seeded_rng(2024, "lp-oracle");
    int feasible = 0;
    for (int trial = 0; trial < 60; ++trial) {
        oracle::DenseLp d;
        const std::size_t n = 5, m = 3 + rng.index(3);
        for (std::size_t i = 0; i < n; ++i) {
            d.c.push_back(rng.uniform(-3, 5));
            d.lo.push_back(rng.bernoulli(0.3) ? rng.uniform(-2, 0) : 0.0);
            d.hi.push_back(rng.uniform(1, 6));
        }
        for (std::size_t r = 0; r < m; ++r) {
            std::vector<double> a(n);
            for (auto& v : a) v = rng.uniform(-2, 4);
            d.A.push_back(a);
            d.b.push_back(rng.uniform(-1, 10));
        }
        const auto expected = oracle::vertex_enumeration(d);
        const auto got = solve_lp(from_dense(d));
        if (!expected) {
            CHECK(got.status == Status::infeasible);
            continue;
        }
        ++feasible;
        REQUIRE(got.optimal());
        CHECK(std::abs(got.objective_value - *expected) <= 1e-6);
        CHECK(from_dense(d).max_violation(got.values, false) <= 1e-7);
    }
    CHECK(feasible > 30);
}

TEST_CASE("milp: knapsack") {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    const int a = lp.add_variable("a", 0, 1, VarType::binary, 5.0);
    const int b = lp.add_variable("b", 0, 1, VarType::binary, 4.0);
    lp.add_constraint("weight", {{a, 3.0}, {b, 2.0}}, Relation::less_equal, 4.0);
    const auto s = solve_milp(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == 5.0);
    CHECK(s.values[a] == 1.0);
    CHECK(s.values[b] == 0.0);
}

TEST_CASE("milp: continuous program equals the relaxation") {
    auto rng = seeded_rng(5, "continuous");
    for (int t = 0; t < 10; ++t) {
        oracle::DenseLp d;
        for (int i = 0; i < 4; ++i) {
            d.c.push_back(rng.uniform(0, 3));
            d.lo.push_back(0);
            d.hi.push_back(4);
        }
        d.A = {{1, 2, 1, 1}, {2, 1, 0, 3}};
        d.b = {5, 7};
        const auto lp = from_dense(d);
        const auto a = solve_lp(lp);
        const auto b = solve_milp(lp);
        CHECK(a.values == b.values);
        CHECK(a.objective_value == b.objective_value);
    }
}

TEST_CASE("milp: 100 random binary programs match exhaustive enumeration") {
    auto rng = seeded_rng(99, "binary-oracle");
    int infeasible = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.index(11);
        const auto p = random_binary(rng, n);
        const auto expected = oracle::enumerate_binary(p);
        const auto lp = from_binary(p);
        const auto got = solve_milp(lp);
        if (!expected) {
            ++infeasible;
            CHECK(got.status == Status::infeasible);
            continue;
        }
        REQUIRE(got.optimal());
        CHECK(got.objective_value == *expected);
        CHECK(lp.evaluate(got.values) == *expected);
        CHECK(lp.max_violation(got.values, true) <= 1e-7);
        const auto relaxed = solve_lp(lp);
        CHECK(got.objective_value <= relaxed.objective_value + 1e-9);
    }
    CHECK(infeasible < 50);
}

TEST_CASE("milp: general integers and minimisation") {
    // min 3x + 2y  s.t.  x + y >= 3.5,  x - y <= 1,  x,y integer in [0, 10]
    LinearProgram lp;
    lp.sense = Sense::minimize;
    const int x = lp.add_variable("x", 0, 10, VarType::integer, 3.0);
    const int y = lp.add_variable("y", 0, 10, VarType::integer, 2.0);
    lp.add_constraint("cover", {{x, 1}, {y, 1}}, Relation::greater_equal, 3.5);
    lp.add_constraint("gap", {{x, 1}, {y, -1}}, Relation::less_equal, 1.0);
    const auto s = solve_milp(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == 8.0);
    CHECK(solve_lp(lp).objective_value <= s.objective_value);
}

TEST_CASE("milp: node limit is reported apart from infeasibility") {
    auto rng = seeded_rng(3, "limit");
    LinearProgram lp;
    lp.sense = Sense::maximize;
    std::vector<Term> row;
    for (int i = 0; i < 30; ++i) {
        const double w = 2.0 * static_cast<double>(10 + rng.index(90)) + 1.0;
        lp.add_variable("v" + std::to_string(i), 0, 1, VarType::binary, w);
        row.push_back({i, w});
    }
    lp.add_constraint("cap", row, Relation::less_equal, 1001.0);
    MilpOptions opt;
    opt.node_limit = 3;
    const auto s = solve_milp(lp, opt);
    CHECK(s.status == Status::node_limit);
    CHECK(s.status != Status::infeasible);
}

TEST_CASE("milp: repeated solves are identical") {
    auto rng = seeded_rng(17, "determinism");
    const auto p = random_binary(rng, 12);
    const auto a = solve_milp(from_binary(p));
    const auto b = solve_milp(from_binary(p));
    CHECK(a.values == b.values);
    CHECK(a.nodes == b.nodes);
}

TEST_CASE("milp: invalid bounds are rejected") {
    LinearProgram lp;
    lp.add_variable("x", 2, 1, VarType::continuous);
    CHECK_THROWS_AS(lp.validate(), InputError);
    CHECK_THROWS_AS(solve_milp(lp), InputError);
}

TEST_CASE("lp format export is stable") {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    const int a = lp.add_variable("a", 0, 1, VarType::binary, 5.0);
    const int b = lp.add_variable("b", 0, 3, VarType::integer, 4.0);
    const int c = lp.add_variable("c", -1, kInfinity, VarType::continuous, -1.0);
    lp.add_constraint("weight", {{a, 3.0}, {b, 2.0}, {c, 1.0}}, Relation::less_equal, 4.0);
    lp.add_constraint("link", {{b, 1.0}, {c, -1.0}}, Relation::equal, 0.0);
    const std::string text = to_lp_format(lp);
    CHECK(text == to_lp_format(lp));
    CHECK(text.find("Maximize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Binary\n") != std::string::npos);
    CHECK(text.find("General") != std::string::npos);
    CHECK(text.find(" c0: ") != std::string::npos);
    CHECK(text.find(" = 0\n") != std::string::npos);
    CHECK(text.rfind("End") != std::string::npos);
}
