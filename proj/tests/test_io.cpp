#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "aavr/csv.hpp"
#include "aavr/scenarios.hpp"
#include "aavr/serialize.hpp"

using namespace aavr;

TEST_CASE("csv fields") {
    CHECK(csv::split_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(csv::split_line("\"x,y\",\"say \"\"hi\"\"\",z") == std::vector<std::string>{"x,y", "say \"hi\"", "z"});
    CHECK(csv::to_double(" 2.5") == 2.5);
    CHECK_THROWS_AS(csv::to_double("2.5x"), InputError);
    CHECK_THROWS_AS(csv::to_integer("1.5"), InputError);
    CHECK(csv::to_integer("-42") == -42);
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -7.25, 123456789.0}) CHECK(csv::to_double(csv::format(v)) == v);
}

TEST_CASE("csv reader and writer") {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"name", "value"});
    w.row({"a,b", "1"});
    std::istringstream in(out.str() + "\n");
    csv::Reader r(in, "t.csv");
    CHECK(r.column("value") == 1);
    CHECK_THROWS_AS(r.column("missing"), ScenarioError);
    std::vector<std::string> f;
    REQUIRE(r.next(f));
    CHECK(f[0] == "a,b");
    CHECK_FALSE(r.next(f));
    std::istringstream empty("");
    CHECK_THROWS_AS(csv::Reader(empty, "e.csv"), ScenarioError);
}

TEST_CASE("config json") {
    ScenarioConfig c;
    c.beta = 0.5;
    c.gamma = 12.0;
    c.aavr_tiebreak = false;
    const auto back = io::config_from_json(io::config_to_json(c));
    CHECK(io::config_to_json(back) == io::config_to_json(c));
    CHECK(*back.gamma == 12.0);
    const auto partial = io::config_from_json(nlohmann::json{{"rho", 2.0}});
    CHECK(partial.rho == 2.0);
    CHECK(partial.beta == ScenarioConfig{}.beta);
    CHECK_THROWS_AS(io::config_from_json(nlohmann::json{{"bogus", 1}}), ScenarioError);
    CHECK_THROWS(io::config_from_json(nlohmann::json{{"M", 0}}));
    CHECK_THROWS_AS(io::config_from_json(nlohmann::json{{"rho", "high"}}), ScenarioError);
}

TEST_CASE("bundle round trip") {
    for (const auto& b : {case_study_1(), case_study_3(5), synthetic_network(4, 15, 2)}) {
        const auto j = io::bundle_to_json(b);
        const auto back = io::bundle_from_json(j);
        CHECK(io::bundle_to_json(back) == j);
        CHECK(back.graph == b.graph);
        CHECK(back.drivers.size() == b.drivers.size());
    }
    const auto dir = std::filesystem::temp_directory_path() / "aavr_io_test";
    std::filesystem::create_directories(dir);
    const auto b = synthetic_network(3, 6, 1);
    io::save_bundle(b, dir / "b.json");
    CHECK(io::bundle_to_json(io::load_bundle(dir / "b.json")) == io::bundle_to_json(b));
    CHECK_THROWS_AS(io::load_bundle(dir / "nope.json"), ScenarioError);
}

TEST_CASE("drivers csv round trip") {
    auto drivers = synthetic_network(3, 5, 3).drivers;
    drivers[2].belief_system = {3, 2};
    std::ostringstream out;
    io::write_drivers_csv(out, drivers);
    std::istringstream in(out.str());
    const auto back = io::read_drivers_csv(in, "drivers.csv");
    REQUIRE(back.size() == drivers.size());
    for (std::size_t c = 0; c < back.size(); ++c) {
        CHECK(back[c].id == drivers[c].id);
        CHECK(back[c].region == drivers[c].region);
        CHECK(back[c].belief_system == drivers[c].belief_system);
        CHECK(back[c].preference == drivers[c].preference);
    }
    std::istringstream bad("driver_id,region,alpha_r,beta_r,alpha_p,beta_p\n0,0,0,1,1,1\n");
    CHECK_THROWS_AS(io::read_drivers_csv(bad, "bad.csv"), ScenarioError);
}

TEST_CASE("demand csv round trip") {
    const auto h = synthetic_network(3, 5, 3).history;
    std::ostringstream out;
    io::write_demand_csv(out, h);
    std::istringstream in(out.str());
    const auto back = io::read_demand_csv(in, "demand.csv");
    REQUIRE(back.n_regions() == h.n_regions());
    const std::size_t n = std::min<std::size_t>(h.regions[0].size(), 168);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = back.regions[0][back.regions[0].size() - 1 - k];
        const auto& b = h.regions[0][h.regions[0].size() - 1 - k];
        CHECK(a.demand == b.demand);
        CHECK(a.period_index == b.period_index);
    }
}

TEST_CASE("decisions csv round trip and errors") {
    const auto corpus = planted_decision_corpus({{1, -1, 0}}, 3, 4, 3, 9);
    std::ostringstream out;
    io::write_decisions_csv(out, corpus);
    std::istringstream in(out.str());
    const auto back = io::read_decisions_csv(in, "decisions.csv");
    REQUIRE(back.size() == corpus.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].driver == corpus[k].driver);
        CHECK(back[k].decision.chosen == corpus[k].decision.chosen);
        CHECK(back[k].decision.regions[1].values == corpus[k].decision.regions[1].values);
    }
    std::istringstream header_only("driver_id,period,chosen_region,region,f_0\n");
    try {
        io::read_decisions_csv(header_only, "empty_decisions.csv");
        FAIL("expected an error");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("empty_decisions.csv") != std::string::npos);
    }
    std::istringstream orphan("driver_id,period,chosen_region,region,f_0\n0,0,5,0,1.0\n0,0,5,1,2.0\n");
    CHECK_THROWS_AS(io::read_decisions_csv(orphan, "o.csv"), ScenarioError);
}
