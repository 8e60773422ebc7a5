#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aavr/behavior.hpp"
#include "aavr/csv.hpp"
#include "aavr/milp.hpp"
#include "aavr/rebalance.hpp"
#include "aavr/scenarios.hpp"
#include "aavr/serialize.hpp"
#include "aavr/sim.hpp"

namespace fs = std::filesystem;
using namespace aavr;
using rebalance::Model;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    unsigned long long seed = 42;
    unsigned jobs = 1;
    std::string config_path;
    std::string export_lp;
    std::optional<double> beta;
    std::optional<double> horizon;
    std::optional<double> demand_multiplier;
    std::string command_line;
};

/// Config file first, then explicit flags.
void apply_config(ScenarioConfig& cfg, const Globals& g) {
    if (!g.config_path.empty()) cfg = io::load_config(g.config_path, cfg);
    if (g.beta) cfg.beta = *g.beta;
    if (g.horizon) cfg.horizon.minutes = *g.horizon;
    if (g.demand_multiplier) cfg.demand_multiplier = *g.demand_multiplier;
    cfg.seed = g.seed;
    cfg.validate();
}

std::vector<Model> parse_models(const std::string& text) {
    if (text == "all") return {std::begin(rebalance::kAllModels), std::end(rebalance::kAllModels)};
    std::vector<Model> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(rebalance::parse_model(item));
        } catch (const InputError&) {
            throw UsageError("unknown model '" + item + "' (expected aavr, b1, b2, b3, b4 or all)");
        }
    }
    if (out.empty()) throw UsageError("no model given");
    return out;
}

std::vector<std::uint64_t> seed_list(unsigned long long first, std::size_t n) {
    std::vector<std::uint64_t> seeds(n);
    std::iota(seeds.begin(), seeds.end(), first);
    return seeds;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write " + path.string());
    return out;
}

void write_manifest(const fs::path& dir, const Globals& g, const std::string& command,
                    const std::vector<std::uint64_t>& seeds, const std::vector<Model>& models,
                    const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j;
    j["command"] = command;
    j["invocation"] = g.command_line;
    j["config"] = g.config_path.empty() ? nlohmann::json() : nlohmann::json(g.config_path);
    j["seeds"] = seeds;
    j["models"] = nlohmann::json::array();
    for (Model m : models) j["models"].push_back(rebalance::to_string(m));
    j["out"] = dir.string();
    j["version"] = AAVR_VERSION;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    auto out = open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

void export_programs(const Globals& g, const std::vector<Model>& models, const rebalance::FleetSnapshot& snap) {
    if (g.export_lp.empty()) return;
    const auto dir = prepare_dir(g.export_lp);
    for (Model m : models) {
        auto out = open_out(dir / (std::string(rebalance::to_string(m)) + ".lp"));
        out << milp::to_lp_format(rebalance::build_program(m, snap));
    }
}

ScenarioBundle case_bundle(int id, unsigned long long seed) {
    switch (id) {
        case 1: return case_study_1();
        case 2: return case_study_2();
        default: return case_study_3(seed);
    }
}

/// synthetic:R:N[:seed], case-study-K or a bundle JSON path.
ScenarioBundle load_scenario(const std::string& spec, unsigned long long seed) {
    if (spec.rfind("synthetic", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() < 3 || parts.size() > 4) throw UsageError("expected synthetic:REGIONS:DRIVERS[:SEED]");
        try {
            const auto R = static_cast<std::size_t>(csv::to_integer(parts[1]));
            const auto N = static_cast<std::size_t>(csv::to_integer(parts[2]));
            const auto s = parts.size() == 4 ? static_cast<unsigned long long>(csv::to_integer(parts[3])) : seed;
            return synthetic_network(R, N, s);
        } catch (const InputError& e) {
            throw UsageError(std::string("bad synthetic scenario: ") + e.what());
        }
    }
    if (spec.rfind("case-study-", 0) == 0) {
        const int id = static_cast<int>(csv::to_integer(spec.substr(11)));
        if (id < 1 || id > 3) throw UsageError("case study id must be 1, 2 or 3");
        return case_bundle(id, seed);
    }
    return io::load_bundle(spec);
}

struct Stat {
    double mean = 0.0;
    double sd = 0.0;
};

Stat stat(const std::vector<double>& xs) {
    Stat s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        for (double x : xs) s.sd += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(s.sd / static_cast<double>(xs.size() - 1));
    }
    return s;
}

int cmd_case_study(const Globals& g, int id, const std::string& model_text, int replications, const std::string& out) {
    const auto models = parse_models(model_text);
    auto bundle = case_bundle(id, g.seed);
    apply_config(bundle.config, g);
    const auto snap = pinned_snapshot(bundle, bundle.demand.mean_at(bundle.start_minute));
    const RegionId B{1};

    struct Row {
        Model model;
        std::size_t to_b;
        std::size_t moves;
        double supply_b;
    };
    std::vector<Row> rows;
    for (Model m : models) {
        auto plan = rebalance::recommend(m, snap);
        rebalance::fill_expectations(plan, snap);
        rows.push_back({m, plan.recommended_to(B, snap), plan.moves(snap), plan.expected_supply[1]});
    }
    export_programs(g, models, snap);

    if (rows.size() == 1) {
        std::printf("recommended_to_B: %zu\n", rows[0].to_b);
    } else {
        std::printf("%-6s %18s %8s %18s\n", "model", "recommended_to_B", "moves", "expected_supply_B");
        for (const auto& r : rows)
            std::printf("%-6s %18zu %8zu %18.2f\n", std::string(rebalance::to_string(r.model)).c_str(), r.to_b, r.moves,
                        r.supply_b);
    }

    const auto seeds = seed_list(g.seed, static_cast<std::size_t>(std::max(replications, 0)));
    std::vector<std::pair<Stat, Stat>> mc;
    if (replications > 0) {
        const auto e = sim::run_experiment(bundle, models, 1, seeds, {g.jobs, false});
        std::printf("monte carlo over %d replications\n", replications);
        std::printf("%-6s %10s %8s %12s %8s\n", "model", "served", "sd", "idle_at_B", "sd");
        for (std::size_t m = 0; m < models.size(); ++m) {
            std::vector<double> served, idle;
            for (const auto& run : e.runs[m]) {
                served.push_back(static_cast<double>(run.metrics.served()));
                idle.push_back(static_cast<double>(run.metrics.periods.at(0).idle_arrivals.at(1)));
            }
            mc.emplace_back(stat(served), stat(idle));
            std::printf("%-6s %10.3f %8.3f %12.3f %8.3f\n", std::string(rebalance::to_string(models[m])).c_str(),
                        mc.back().first.mean, mc.back().first.sd, mc.back().second.mean, mc.back().second.sd);
        }
    }

    if (!out.empty()) {
        const auto dir = prepare_dir(out);
        auto f = open_out(dir / "recommendations.csv");
        csv::Writer w(f);
        w.row({"case_study", "model", "recommended_to_B", "moves", "expected_supply_B"});
        for (const auto& r : rows)
            w.row({std::to_string(id), std::string(rebalance::to_string(r.model)), std::to_string(r.to_b),
                   std::to_string(r.moves), csv::format(r.supply_b)});
        if (!mc.empty()) {
            auto fm = open_out(dir / "monte_carlo.csv");
            csv::Writer wm(fm);
            wm.row({"case_study", "model", "replications", "served_mean", "served_sd", "idle_at_B_mean", "idle_at_B_sd"});
            for (std::size_t m = 0; m < models.size(); ++m)
                wm.row({std::to_string(id), std::string(rebalance::to_string(models[m])), std::to_string(replications),
                        csv::format(mc[m].first.mean), csv::format(mc[m].first.sd), csv::format(mc[m].second.mean),
                        csv::format(mc[m].second.sd)});
        }
        write_manifest(dir, g, "case-study", seeds, models, {{"scenario", "case-study-" + std::to_string(id)}});
    }
    return 0;
}

int cmd_simulate(const Globals& g, const std::string& scenario, const std::string& model_text, long long periods,
                 std::size_t n_seeds, bool events, const std::string& out) {
    const auto models = parse_models(model_text);
    if (periods < 0) throw UsageError("--periods must be nonnegative");
    auto bundle = load_scenario(scenario, g.seed);
    apply_config(bundle.config, g);
    const auto seeds = seed_list(g.seed, n_seeds);

    if (!g.export_lp.empty()) {
        std::vector<double> nu = bundle.demand.mean_at(bundle.start_minute);
        bool pinned = std::all_of(bundle.drivers.begin(), bundle.drivers.end(), [](const behavior::DriverAgent& d) {
            return d.pinned_mu.has_value() && d.pinned_preference.has_value();
        });
        if (pinned) export_programs(g, models, pinned_snapshot(bundle, nu));
        else std::fprintf(stderr, "note: --export-lp needs pinned drivers; skipped\n");
    }

    const auto e = sim::run_experiment(bundle, models, periods, seeds, {g.jobs, events});
    const auto dir = prepare_dir(out);
    {
        auto f = open_out(dir / "periods.csv");
        sim::write_period_csv(f, e);
    }
    {
        auto f = open_out(dir / "runs.csv");
        sim::write_run_csv(f, e);
    }
    {
        auto f = open_out(dir / "summary.csv");
        sim::write_summary_csv(f, e);
    }
    {
        auto f = open_out(dir / "metrics.json");
        sim::write_metrics_json(f, e);
    }
    if (events) {
        auto f = open_out(dir / "events.csv");
        sim::write_event_log(f, e);
    }
    write_manifest(dir, g, "simulate", seeds, models, {{"scenario", scenario}, {"scenario_seed", g.seed}, {"periods", periods}});

    auto summary = e.summary();
    std::stable_sort(summary.begin(), summary.end(),
                     [](const auto& a, const auto& b) { return a.served_per_period > b.served_per_period; });
    std::printf("%-6s %12s %10s %14s %14s\n", "model", "served/per", "wait", "platform", "driver_profit");
    for (const auto& s : summary) {
        const std::string wait = s.mean_wait ? csv::format(std::round(*s.mean_wait * 1000) / 1000) : "n/a";
        std::printf("%-6s %12.3f %10s %14.2f %14.2f\n", std::string(rebalance::to_string(s.model)).c_str(),
                    s.served_per_period, wait.c_str(), s.platform_earnings, s.driver_profit);
    }
    return 0;
}

std::vector<behavior::DecisionRecord> read_decisions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open decisions file " + path);
    return io::read_decisions_csv(in, fs::path(path).filename().string());
}

void write_weight_row(csv::Writer& w, const std::string& who, std::size_t n, const behavior::PreferenceFit& fit) {
    std::vector<std::string> row{who, std::to_string(n), fit.degenerate ? "1" : "0"};
    for (double x : fit.model.weights) row.push_back(csv::format(x));
    w.row(row);
}

std::vector<std::string> weight_header(std::size_t n_weights) {
    std::vector<std::string> h{"driver_id", "decisions", "degenerate"};
    for (std::size_t k = 0; k < n_weights; ++k) h.push_back("w_" + std::to_string(k));
    return h;
}

int cmd_fit(const Globals& g, const std::string& trips, const std::string& decisions, bool planted,
            const std::string& out) {
    if (trips.empty() && decisions.empty() && !planted)
        throw UsageError("fit needs --trips, --decisions or --planted");
    const auto dir = prepare_dir(out);

    if (!decisions.empty()) {
        const auto records = read_decisions(decisions);
        std::map<std::size_t, std::vector<behavior::PreferenceDecision>> by_driver;
        std::vector<behavior::PreferenceDecision> all;
        for (const auto& r : records) {
            by_driver[r.driver].push_back(r.decision);
            all.push_back(r.decision);
        }
        const auto pooled = behavior::fit_preference(all);
        auto f = open_out(dir / "weights.csv");
        csv::Writer w(f);
        w.row(weight_header(pooled.model.weights.size()));
        for (const auto& [driver, ds] : by_driver) write_weight_row(w, std::to_string(driver), ds.size(),
                                                                    behavior::fit_preference(ds));
        std::printf("fitted %zu drivers from %zu decisions; pooled top-1 accuracy %.3f\n", by_driver.size(),
                    all.size(), behavior::top1_accuracy(pooled.model, all));
    }

    if (!trips.empty()) {
        const auto ingest = ingest_trip_records(trips);
        auto tm = open_out(dir / "travel_minutes.csv");
        io::write_table_csv(tm, ingest.graph.travel_time_table(), "minutes");
        auto ts = open_out(dir / "travel_stddev.csv");
        io::write_table_csv(ts, ingest.graph.travel_stddev_table(), "stddev_minutes");
        auto tk = open_out(dir / "travel_km.csv");
        io::write_table_csv(tk, ingest.graph.distance_table(), "km");
        auto od = open_out(dir / "od.csv");
        io::write_table_csv(od, ingest.od, "share");
        auto dh = open_out(dir / "demand_history.csv");
        io::write_demand_csv(dh, ingest.history);
        std::printf("ingested %lld trips (%lld skipped) over %zu regions; %lld pairs without observations\n",
                    ingest.rows, ingest.skipped_rows, ingest.graph.n_regions(), ingest.fallback_pairs);
    }

    if (planted) {
        const behavior::PreferenceModel truth{{2.0, -1.0, 0.5, 0.0}};
        const auto corpus = planted_decision_corpus(truth, 50, 10, 4, g.seed);
        {
            auto f = open_out(dir / "planted_decisions.csv");
            io::write_decisions_csv(f, corpus);
        }
        std::vector<behavior::PreferenceDecision> train, test;
        for (std::size_t i = 0; i < corpus.size(); ++i) (i % 5 == 4 ? test : train).push_back(corpus[i].decision);
        const auto fit = behavior::fit_preference(train);
        auto top = [](const behavior::PreferenceModel& m, const behavior::PreferenceDecision& d) {
            const auto L = behavior::preference_distribution(m, d.regions);
            return std::max_element(L.begin(), L.end()) - L.begin();
        };
        std::size_t agree = 0;
        for (const auto& d : test) agree += top(fit.model, d) == top(truth, d);
        const double recovery = static_cast<double>(agree) / static_cast<double>(test.size());
        auto f = open_out(dir / "planted_fit.csv");
        csv::Writer w(f);
        w.row(weight_header(fit.model.weights.size()));
        write_weight_row(w, "pooled", train.size(), fit);
        std::printf("planted weights: 2 -1 0.5 0\nfitted weights:");
        for (double x : fit.model.weights) std::printf(" %.3f", x);
        std::printf("\nrecovery_top1: %.3f\nchosen_region_top1: %.3f\nplanted_model_top1: %.3f\n", recovery,
                    behavior::top1_accuracy(fit.model, test), behavior::top1_accuracy(truth, test));
    }
    write_manifest(dir, g, "fit", {g.seed}, {},
                   {{"trips", trips}, {"decisions", decisions}, {"planted", planted}});
    return 0;
}

int cmd_plotdata(const Globals& g, const std::string& metrics, const std::string& scenario_flag, int successes,
                 const std::string& out) {
    const fs::path src(metrics);
    const fs::path summary_path = src / "summary.csv";
    const fs::path manifest_path = src / "manifest.json";
    std::ifstream summary(summary_path);
    if (!summary) throw ScenarioError("cannot open " + summary_path.string());
    std::ifstream manifest_in(manifest_path);
    if (!manifest_in) throw ScenarioError("cannot open " + manifest_path.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_in);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(manifest_path.string() + ": " + e.what());
    }
    const std::string scenario =
        !scenario_flag.empty() ? scenario_flag : manifest.value("scenario", std::string("synthetic:10:100"));
    const auto dir = prepare_dir(out);

    {
        auto f = open_out(dir / "comparison_bars.csv");
        csv::Writer w(f);
        w.row({"metric", "model", "scenario", "value"});
        csv::Reader r(summary, summary_path.string());
        const std::size_t model_col = r.column("model");
        const std::vector<std::string> names{"served_per_period", "mean_wait", "platform_earnings", "driver_profit"};
        std::vector<std::size_t> cols;
        for (const auto& n : names) cols.push_back(r.column(n));
        std::vector<std::string> fields;
        while (r.next(fields))
            for (std::size_t k = 0; k < names.size(); ++k) w.row({names[k], fields.at(model_col), scenario, fields.at(cols[k])});
    }
    {
        const auto bundle = load_scenario(scenario, manifest.value("scenario_seed", g.seed));
        auto f = open_out(dir / "reachability.csv");
        csv::Writer w(f);
        w.row({"scenario", "horizon_minutes", "reachability"});
        for (int h = 1; h <= 60; ++h)
            w.row({scenario, std::to_string(h), csv::format(reachability_fraction(bundle.graph, {double(h)}))});
    }
    {
        ScenarioConfig cfg;
        apply_config(cfg, g);
        auto f = open_out(dir / "posterior_trace.csv");
        csv::Writer w(f);
        w.row({"step", "outcome", "alpha", "beta", "mean"});
        behavior::BetaBelief b;
        w.row({"0", "", csv::format(b.alpha), csv::format(b.beta), csv::format(b.mean())});
        for (int k = 1; k <= successes; ++k) {
            b = behavior::update_belief(b, true, cfg.epsilon0, cfg.epsilon1);
            w.row({std::to_string(k), "accept", csv::format(b.alpha), csv::format(b.beta), csv::format(b.mean())});
        }
        std::printf("posterior after %d successes: %.4f\n", successes, b.mean());
    }
    write_manifest(dir, g, "plotdata", {g.seed}, {}, {{"metrics", metrics}, {"scenario", scenario}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Globals g;
    for (int i = 0; i < argc; ++i) g.command_line += (i ? " " : "") + std::string(argv[i]);

    CLI::App app{"Adherence-aware vehicle rebalancing: case studies, simulation, fitting and plot data"};
    app.set_version_flag("--version", std::string(AAVR_VERSION));
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "Base seed; replications use seed, seed+1, ...");
    app.add_option("--jobs", g.jobs, "Worker threads across seeds")->check(CLI::PositiveNumber);
    app.add_option("--config", g.config_path, "JSON config; explicit flags override it");
    app.add_option("--export-lp", g.export_lp, "Write each model's program in LP format to this directory");
    app.add_option("--beta", g.beta, "Travel penalty");
    app.add_option("--horizon", g.horizon, "Planning horizon in minutes");
    app.add_option("--demand-multiplier", g.demand_multiplier, "Scale on forecast demand");

    int case_id = 1;
    std::string model = "aavr";
    int replications = 0;
    std::string out;
    auto* cs = app.add_subcommand("case-study", "Two-station case studies");
    cs->add_option("id", case_id, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
    cs->add_option("--model", model, "aavr, b1..b4, a comma list, or all");
    cs->add_option("--replications", replications, "Monte Carlo replications of one period")->check(CLI::NonNegativeNumber);
    cs->add_option("--out", out, "Output directory");

    std::string scenario = "synthetic:10:100";
    long long periods = 50;
    std::size_t n_seeds = 1;
    bool events = false;
    std::string sim_model = "all";
    std::string sim_out = "out/simulate";
    auto* sm = app.add_subcommand("simulate", "Multi-period fleet simulation");
    sm->add_option("--scenario", scenario, "synthetic:R:N[:SEED], case-study-K or a bundle JSON");
    sm->add_option("--model", sim_model, "aavr, b1..b4, a comma list, or all");
    sm->add_option("--periods", periods, "Planning periods");
    sm->add_option("--seeds", n_seeds, "Number of seeds starting at --seed");
    sm->add_flag("--events", events, "Also write the event log");
    sm->add_option("--out", sim_out, "Output directory");

    std::string trips, decisions, fit_out = "out/fit";
    bool planted = false;
    auto* ft = app.add_subcommand("fit", "Fit preferences and travel tables from records");
    ft->add_option("--trips", trips, "Trip records CSV");
    ft->add_option("--decisions", decisions, "Decision records CSV");
    ft->add_flag("--planted", planted, "Fit a generated corpus with known weights and report recovery");
    ft->add_option("--out", fit_out, "Output directory");

    std::string metrics, plot_scenario, plot_out = "out/plotdata";
    int successes = 6;
    auto* pd = app.add_subcommand("plotdata", "Long-format series for plotting");
    pd->add_option("--metrics", metrics, "Directory written by simulate")->required();
    pd->add_option("--scenario", plot_scenario, "Scenario for the reachability curve (default: from the manifest)");
    pd->add_option("--successes", successes, "Length of the posterior trace")->check(CLI::NonNegativeNumber);
    pd->add_option("--out", plot_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*cs) return cmd_case_study(g, case_id, model, replications, out);
        if (*sm) return cmd_simulate(g, scenario, sim_model, periods, n_seeds, events, sim_out);
        if (*ft) return cmd_fit(g, trips, decisions, planted, fit_out);
        if (*pd) return cmd_plotdata(g, metrics, plot_scenario, successes, plot_out);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const sim::PeriodError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInfeasible;
    } catch (const rebalance::SolveError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInfeasible;
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitUsage;
}
