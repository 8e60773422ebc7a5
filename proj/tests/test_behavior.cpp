#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "aavr/behavior.hpp"
#include "aavr/scenarios.hpp"
#include "oracles.hpp"

using namespace aavr;
using namespace aavr::behavior;

namespace {

double logit(double p) { return std::log(p / (1 - p)); }

}  // namespace

TEST_CASE("zero weights give a uniform preference") {
    const PreferenceModel m{{0, 0, 0}};
    const std::vector<RegionFeatures> f{{{1, 2}}, {{3, -1}}, {{0, 0}}, {{5, 5}}};
    for (double p : preference_distribution(m, f)) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("preference normalises the sigmoid scores") {
    // one feature, no intercept: sigmoid(logit(0.8)) = 0.8, sigmoid(logit(0.2)) = 0.2
    const PreferenceModel m{{1.0, 0.0}};
    const std::vector<RegionFeatures> f{{{logit(0.8)}}, {{logit(0.2)}}};
    const auto L = preference_distribution(m, f);
    CHECK(L[0] == doctest::Approx(0.8));
    CHECK(L[1] == doctest::Approx(0.2));

    auto rng = seeded_rng(4, "pref");
    const PreferenceModel r{{0.7, -1.3, 0.2}};
    for (int t = 0; t < 50; ++t) {
        std::vector<RegionFeatures> g(1 + rng.index(6));
        for (auto& x : g) x.values = {rng.normal(0, 5), rng.normal(0, 5)};
        const auto P = preference_distribution(r, g);
        double s = 0;
        for (double p : P) s += p;
        CHECK(s == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(preference_distribution(r, f), InputError);
}

TEST_CASE("extreme scores do not underflow") {
    const PreferenceModel m{{1.0, 0.0}};
    const std::vector<RegionFeatures> f{{{-800}}, {{-900}}};
    const auto L = preference_distribution(m, f);
    CHECK(std::isfinite(L[0]));
    CHECK(L[0] + L[1] == doctest::Approx(1.0));
    CHECK(L[0] > L[1]);
}

TEST_CASE("standardised features") {
    const std::vector<RegionFeatures> f{{{1, 7}}, {{3, 7}}};
    const auto z = standardize_features(f);
    CHECK(z[0].values[0] == doctest::Approx(-1.0));
    CHECK(z[1].values[0] == doctest::Approx(1.0));
    CHECK(z[0].values[1] == 0.0);
}

TEST_CASE("fit: a single decision pulls toward the chosen region") {
    const std::vector<PreferenceDecision> h{{1, {{{0.0, 1.0}}, {{1.0, 0.0}}}}};
    const auto fit = fit_preference(h);
    CHECK_FALSE(fit.degenerate);
    CHECK(preference_distribution(fit.model, h[0].regions)[1] > 0.5);
}

TEST_CASE("fit: always choosing the nearest region gives a negative distance weight") {
    auto rng = seeded_rng(6, "nearest");
    std::vector<PreferenceDecision> h;
    for (int i = 0; i < 200; ++i) {
        PreferenceDecision d;
        d.regions.resize(4);
        double best = 1e9;
        for (std::size_t j = 0; j < 4; ++j) {
            d.regions[j].values = {rng.uniform(0, 10), rng.uniform(0, 5)};
            if (d.regions[j].values[0] < best) {
                best = d.regions[j].values[0];
                d.chosen = j;
            }
        }
        h.push_back(d);
    }
    const auto fit = fit_preference(h);
    CHECK(fit.model.weights[0] < 0.0);
    CHECK(top1_accuracy(fit.model, h) >= 0.95);
}

TEST_CASE("fit: identical features are degenerate") {
    std::vector<PreferenceDecision> h(5, PreferenceDecision{0, {{{1.0, 2.0}}, {{1.0, 2.0}}}});
    const auto fit = fit_preference(h);
    CHECK(fit.degenerate);
    for (double w : fit.model.weights) CHECK(w == 0.0);
    CHECK_THROWS_AS(fit_preference(std::vector<PreferenceDecision>{}), InputError);
    CHECK_THROWS_AS(fit_preference(std::vector<PreferenceDecision>{{3, {{{1.0}}, {{2.0}}}}}), InputError);
}

TEST_CASE("fit: planted weights are recovered") {
    const PreferenceModel planted{{2.0, -1.0, 0.5, 0.0}};
    const auto corpus = planted_decision_corpus(planted, 50, 12, 4, 31);
    std::vector<PreferenceDecision> train, test;
    for (std::size_t i = 0; i < corpus.size(); ++i) (i % 5 == 4 ? test : train).push_back(corpus[i].decision);
    const auto fit = fit_preference(train);
    CHECK(fit.model.weights[0] > 0.0);
    CHECK(fit.model.weights[1] < 0.0);
    CHECK(std::abs(fit.model.weights[0]) > std::abs(fit.model.weights[1]));
    // The fitted ranking cannot beat the planted model on sampled choices by much.
    CHECK(top1_accuracy(fit.model, test) <= top1_accuracy(planted, test) + 0.05);
}

TEST_CASE("belief updates") {
    BetaBelief b;
    for (int i = 0; i < 6; ++i) b = update_belief(b, true, 1.0, 1.0);
    CHECK(b == BetaBelief{7, 1});
    CHECK(b.mean() == doctest::Approx(0.875));
    CHECK(BetaBelief{} == BetaBelief{1, 1});

    BetaBelief c;
    c = update_belief(c, true, 1.0, 2.0);
    c = update_belief(c, false, 1.0, 2.0);
    c = update_belief(c, true, 1.0, 2.0);
    CHECK(c == BetaBelief{5, 2});
}

TEST_CASE("posterior mean never falls under successes") {
    auto rng = seeded_rng(12, "monotone");
    for (int t = 0; t < 100; ++t) {
        BetaBelief b{rng.uniform(0.1, 5), rng.uniform(0.1, 5)};
        const double e1 = rng.uniform(0.1, 3);
        for (int k = 0; k < 20; ++k) {
            const double before = b.mean();
            b = update_belief(b, true, 1.0, e1);
            CHECK(b.mean() > before);
        }
    }
}

TEST_CASE("thompson acceptance probability") {
    CHECK(acceptance_probability_exact({3, 4}, {3, 4}) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(acceptance_probability_exact({2, 1}, {1, 2}) - 5.0 / 6.0) <= 1e-4);
    CHECK(std::abs(oracle::beta_greater(2, 1, 1, 2) - 5.0 / 6.0) <= 1e-6);
    for (auto [a1, b1, a2, b2] : {std::array{7, 1, 1, 1}, {3, 5, 4, 2}, {1, 1, 2, 9}}) {
        CHECK(std::abs(acceptance_probability_exact({double(a1), double(b1)}, {double(a2), double(b2)}) -
                       oracle::beta_greater(a1, b1, a2, b2)) <= 1e-6);
    }
    int inside = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto rng = seeded_rng(s, "thompson");
        inside += std::abs(acceptance_probability({2, 1}, {1, 2}, 10000, rng) - 5.0 / 6.0) <= 0.02;
    }
    CHECK(inside == 50);
    auto rng = seeded_rng(0, "m");
    CHECK_THROWS_AS(acceptance_probability({1, 1}, {1, 1}, 0, rng), InputError);
}

TEST_CASE("decision sampling") {
    auto rng = seeded_rng(9, "decide");
    const double to_zero[] = {1.0, 0.0, 0.0};
    for (int i = 0; i < 200; ++i) {
        const auto d = sample_decision({2}, 1.0, to_zero, rng);
        CHECK(d.accepted);
        CHECK(d.destination == RegionId{2});
    }
    const double to_one[] = {0.0, 1.0, 0.0};
    for (int i = 0; i < 200; ++i) {
        const auto d = sample_decision({2}, 0.0, to_one, rng);
        CHECK_FALSE(d.accepted);
        CHECK(d.destination == RegionId{1});
    }
    int moved = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) moved += sample_decision({1}, 0.5, to_zero, rng).destination == RegionId{1};
    CHECK(std::abs(moved / double(n) - 0.5) <= 0.01);
}

TEST_CASE("driver status transitions") {
    DriverAgent a;
    CHECK(a.idle());
    a.start_repositioning({1}, 3.0);
    CHECK(a.status.activity == DriverActivity::repositioning);
    CHECK_THROWS_AS(a.start_trip({0}, 4.0), std::logic_error);
    a.become_idle();
    a.start_trip({0}, 9.0);
    CHECK(a.status.activity == DriverActivity::on_trip);
    a.become_idle();
    CHECK_THROWS_AS(a.become_idle(), std::logic_error);
}
