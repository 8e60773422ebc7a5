#include "aavr/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "aavr/csv.hpp"
#include "aavr/rng.hpp"

namespace aavr::sim {

using behavior::DriverActivity;
using behavior::DriverAgent;

std::size_t PeriodState::count(DriverActivity activity) const {
    return static_cast<std::size_t>(std::count_if(drivers.begin(), drivers.end(),
                                                  [&](const DriverAgent& d) { return d.status.activity == activity; }));
}

PeriodState initial_state(const ScenarioBundle& bundle) {
    bundle.validate();
    PeriodState s;
    s.open_requests.assign(bundle.n_regions(), {});
    s.drivers = bundle.drivers;
    s.history = bundle.history;
    return s;
}

std::optional<double> PeriodMetrics::mean_wait() const {
    if (served == 0) return std::nullopt;
    return total_wait / static_cast<double>(served);
}

long long SimMetrics::arrived() const {
    long long n = 0;
    for (const auto& p : periods) n += p.arrived;
    return n;
}

long long SimMetrics::served() const {
    long long n = 0;
    for (const auto& p : periods) n += p.served;
    return n;
}

double SimMetrics::mean_served() const {
    return periods.empty() ? 0.0 : static_cast<double>(served()) / static_cast<double>(periods.size());
}

std::optional<double> SimMetrics::mean_wait() const {
    double wait = 0.0;
    for (const auto& p : periods) wait += p.total_wait;
    const long long n = served();
    if (n == 0) return std::nullopt;
    return wait / static_cast<double>(n);
}

double SimMetrics::fares() const {
    double v = 0.0;
    for (const auto& p : periods) v += p.fares;
    return v;
}

double SimMetrics::platform_earnings() const {
    double v = 0.0;
    for (const auto& p : periods) v += p.platform_earnings;
    return v;
}

double SimMetrics::driver_profit() const {
    double v = 0.0;
    for (const auto& p : periods) v += p.driver_profit;
    return v;
}

void record_outcome(DriverAgent& agent, bool accepted, bool allocated, const ScenarioConfig& config) {
    auto& belief = accepted ? agent.belief_system : agent.belief_self;
    belief = behavior::update_belief(belief, allocated, config.epsilon0, config.epsilon1);
}

namespace {

std::string label(const char* purpose, long long period) { return std::string(purpose) + "/" + std::to_string(period); }

std::string label(const char* purpose, long long period, std::size_t id) {
    return label(purpose, period) + "/" + std::to_string(id);
}

struct Calendar {
    int hour = 0;
    int weekday = 0;
    int day_of_month = 1;
};

Calendar calendar_at(double minute_of_week) {
    const double m = std::fmod(std::fmod(minute_of_week, 10080.0) + 10080.0, 10080.0);
    Calendar c;
    c.hour = static_cast<int>(m / 60.0) % 24;
    c.weekday = static_cast<int>(m / 1440.0) % 7;
    c.day_of_month = 1 + c.weekday;
    return c;
}

/// Expected trip length out of each region under the OD shares.
std::vector<double> expected_trip_km(const ScenarioBundle& b) {
    const std::size_t R = b.n_regions();
    std::vector<double> km(R, 0.0);
    for (std::size_t j = 0; j < R; ++j) {
        for (std::size_t k = 0; k < R; ++k) km[j] += b.od(j, k) * b.graph.distance({j}, {k});
    }
    return km;
}

class Period {
public:
    Period(const PeriodState& in, const ScenarioBundle& b, rebalance::Model model, const ScenarioConfig& cfg,
           std::uint64_t seed, bool log)
        : b_(b), model_(model), cfg_(cfg), seed_(seed), log_(log), out_{in, {}, {}, {}} {
        out_.counters.assign(in.drivers.size(), {});
    }

    PeriodResult run() {
        auto& st = out_.state;
        auto& m = out_.metrics;
        const std::size_t R = b_.n_regions();
        const long long p = st.period_index;
        const double H = cfg_.horizon.minutes;
        t0_ = static_cast<double>(p) * H;
        m.period_index = p;
        m.idle_arrivals.assign(R, 0);
        if (out_.state.open_requests.size() != R) out_.state.open_requests.assign(R, {});

        release_drivers();

        // Demand arrives at the period start.
        const double minute = b_.start_minute + t0_;
        const auto cal = calendar_at(minute);
        auto truth = b_.demand.mean_at(minute);
        for (double& v : truth) v *= cfg_.demand_multiplier;
        auto demand_rng = seeded_rng(seed_, label("demand", p));
        const auto demand = stochastic::sample_demand({truth, b_.demand.stddev}, demand_rng);
        for (std::size_t j = 0; j < R; ++j) {
            st.open_requests[j].assign(static_cast<std::size_t>(demand[j]), t0_);
            m.arrived += demand[j];
        }

        // First batch: co-located idle drivers, lowest id first.
        std::vector<double> first_batch(R, 0.0);
        for (auto& d : st.drivers) {
            if (!d.idle()) continue;
            const std::size_t j = d.region.index;
            if (st.open_requests[j].empty()) continue;
            serve(d, t0_);
            first_batch[j] += 1.0;
            event(d.id.index, "pickup", "wait=0");
        }

        // Expected demand left for the recommender after the first batch.
        std::vector<double> nu;
        if (st.history.regions.empty()) {
            nu = truth;
        } else {
            nu = stochastic::forecast_demand(forecaster_, st.history, {cal.hour, cal.weekday});
            for (double& v : nu) v *= cfg_.demand_multiplier;
        }
        double residual = 0.0;
        for (std::size_t j = 0; j < R; ++j) {
            nu[j] = std::max(0.0, nu[j] - first_batch[j]);
            residual += nu[j];
        }

        rebalance::FleetSnapshot snap{{}, nu, b_.graph, cfg_.horizon, cfg_};
        std::vector<std::size_t> who;
        const auto trip_km = expected_trip_km(b_);
        for (std::size_t c = 0; c < st.drivers.size(); ++c) {
            auto& d = st.drivers[c];
            if (!d.idle()) continue;
            who.push_back(c);
            snap.drivers.push_back({d.id, d.region, confidence(d, p), preference(d, nu, trip_km, cal)});
        }
        m.idle_drivers = static_cast<long long>(who.size());

        rebalance::RecommendationPlan plan;
        plan.destination.resize(who.size());
        for (std::size_t k = 0; k < who.size(); ++k) plan.destination[k] = snap.drivers[k].region;
        if (!who.empty() && residual > 0.0) {
            try {
                plan = rebalance::recommend(model_, snap);
            } catch (const rebalance::SolveError& e) {
                throw PeriodError(p, std::string(rebalance::to_string(model_)) + ": " + e.what(), e.status());
            }
            m.solver_nodes = plan.nodes;
        }

        // Decisions and departures.
        struct Mover {
            std::size_t c;
            double arrival;
            bool accepted;
        };
        std::vector<Mover> movers;
        for (std::size_t k = 0; k < who.size(); ++k) {
            auto& d = st.drivers[who[k]];
            const auto& snapshot_driver = snap.drivers[k];
            const RegionId origin = d.region;
            const RegionId rec = plan.destination[k];
            auto decide = seeded_rng(seed_, label("decide", p, d.id.index));
            const auto dec = behavior::sample_decision(rec, snapshot_driver.mu, snapshot_driver.preference, decide);
            if (rec != origin) {
                ++m.recommendations;
                ++counters(d).recommended;
                event(d.id.index, "recommend", "to=" + std::to_string(rec.index));
                if (dec.accepted) {
                    ++m.accepted;
                    ++counters(d).accepted;
                }
            }
            if (dec.destination == origin) continue;
            event(d.id.index, dec.accepted ? "accept" : "self", "to=" + std::to_string(dec.destination.index));
            auto travel = seeded_rng(seed_, label("travel", p, d.id.index));
            const double t = stochastic::sample_travel_time(b_.graph, origin, dec.destination, travel);
            m.rebalancing_km += b_.graph.distance(origin, dec.destination);
            ++m.repositioned;
            d.start_repositioning(dec.destination, t0_ + t);
            movers.push_back({who[k], t0_ + t, dec.accepted});
        }

        // Arrivals within the period take the remaining requests in order.
        std::sort(movers.begin(), movers.end(), [&](const Mover& a, const Mover& b) {
            if (a.arrival != b.arrival) return a.arrival < b.arrival;
            return a.c < b.c;
        });
        for (const auto& mv : movers) {
            auto& d = st.drivers[mv.c];
            bool allocated = false;
            if (mv.arrival <= t0_ + H) {
                if (!st.open_requests[d.region.index].empty()) {
                    d.become_idle();
                    serve(d, mv.arrival);
                    allocated = true;
                    event(d.id.index, "arrive", "pickup");
                } else {
                    ++m.idle_arrivals[d.region.index];
                    event(d.id.index, "arrive", "idle");
                }
            } else {
                event(d.id.index, "arrive", "late");
            }
            record_outcome(d, mv.accepted, allocated, cfg_);
        }

        // Unserved requests leave at the period end.
        for (auto& q : st.open_requests) q.clear();

        if (!st.history.regions.empty()) {
            stochastic::DemandRecord rec;
            rec.period_index = p;
            rec.hour = cal.hour;
            rec.weekday = cal.weekday;
            rec.day_of_month = cal.day_of_month;
            for (std::size_t j = 0; j < R; ++j) {
                rec.demand = demand[j];
                st.history.append(j, rec);
            }
        }

        m.platform_earnings = cfg_.commission_rate * m.fares;
        m.driver_profit = (1.0 - cfg_.commission_rate) * m.fares - cfg_.cost_per_km * (m.rebalancing_km + m.trip_km);
        ++st.period_index;
        return std::move(out_);
    }

private:
    const ScenarioBundle& b_;
    rebalance::Model model_;
    const ScenarioConfig& cfg_;
    std::uint64_t seed_;
    bool log_;
    PeriodResult out_;
    double t0_ = 0.0;
    stochastic::SeasonalMeanForecaster forecaster_;

    DriverCounters& counters(const DriverAgent& d) { return out_.counters[d.id.index]; }

    void event(std::size_t driver, const char* action, std::string outcome) {
        if (log_) out_.events.push_back({out_.state.period_index, driver, action, std::move(outcome)});
    }

    /// Trips that ended and every repositioning become idle at the period
    /// start.
    void release_drivers() {
        for (auto& d : out_.state.drivers) {
            if (d.status.activity == DriverActivity::repositioning ||
                (d.status.activity == DriverActivity::on_trip && d.status.arrival_time <= t0_ + 1e-9)) {
                d.become_idle();
            }
        }
    }

    void serve(DriverAgent& d, double when) {
        auto& st = out_.state;
        auto& m = out_.metrics;
        auto& queue = st.open_requests[d.region.index];
        const double requested = queue.front();
        queue.erase(queue.begin());
        ++m.served;
        m.total_wait += when - requested;
        ++counters(d).allocated;

        auto rng = seeded_rng(seed_, label("trip", st.period_index, d.id.index));
        const std::size_t from = d.region.index;
        std::vector<double> row(b_.n_regions());
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = b_.od(from, k);
        const RegionId to{rng.categorical(row)};
        const double minutes =
            std::max(stochastic::sample_travel_time(b_.graph, d.region, to, rng), cfg_.min_trip_minutes);
        const double km = std::max(b_.graph.distance(d.region, to), cfg_.min_trip_km);
        m.trip_km += km;
        m.fares += cfg_.fare_base + cfg_.fare_per_km * km;
        d.start_trip(to, when + minutes);
    }

    double confidence(const DriverAgent& d, long long p) const {
        if (d.pinned_mu) return *d.pinned_mu;
        auto rng = seeded_rng(seed_, label("thompson", p, d.id.index));
        return behavior::acceptance_probability(d.belief_system, d.belief_self, cfg_.M, rng);
    }

    std::vector<double> preference(const DriverAgent& d, const std::vector<double>& nu,
                                   const std::vector<double>& trip_km, const Calendar& cal) const {
        if (d.pinned_preference) return *d.pinned_preference;
        const std::size_t R = b_.n_regions();
        std::vector<behavior::RegionFeatures> raw(R);
        for (std::size_t j = 0; j < R; ++j) {
            auto& f = raw[j].values;
            f.assign(behavior::kStandardFeatureDim, 0.0);
            f[behavior::kSearchDistance] = b_.graph.distance(d.region, {j});
            f[behavior::kExpectedPickups] = nu[j];
            f[behavior::kMedianTripDistance] = trip_km[j];
            f[behavior::kHourOfDay] = cal.hour;
            f[behavior::kDayOfWeek] = cal.weekday;
        }
        const auto z = behavior::standardize_features(raw);
        return behavior::preference_distribution(d.preference, z);
    }
};

}  // namespace

PeriodResult run_period(const PeriodState& state, const ScenarioBundle& bundle, rebalance::Model model,
                        const ScenarioConfig& config, std::uint64_t seed, bool log_events) {
    Period period(state, bundle, model, config, seed, log_events);
    return period.run();
}

RunResult simulate(const ScenarioBundle& bundle, rebalance::Model model, long long n_periods, std::uint64_t seed,
                   bool log_events) {
    if (n_periods < 0) throw InputError("number of periods must be nonnegative");
    RunResult run;
    run.final_state = initial_state(bundle);
    run.metrics.drivers.assign(bundle.drivers.size(), {});
    for (long long k = 0; k < n_periods; ++k) {
        auto res = run_period(run.final_state, bundle, model, bundle.config, seed, log_events);
        for (std::size_t c = 0; c < res.counters.size(); ++c) {
            auto& total = run.metrics.drivers[c];
            total.recommended += res.counters[c].recommended;
            total.accepted += res.counters[c].accepted;
            total.allocated += res.counters[c].allocated;
        }
        run.final_state = std::move(res.state);
        run.metrics.periods.push_back(std::move(res.metrics));
        for (auto& e : res.events) run.events.push_back(std::move(e));
    }
    return run;
}

std::vector<ModelSummary> ExperimentResult::summary() const {
    std::vector<ModelSummary> rows;
    for (std::size_t m = 0; m < models.size(); ++m) {
        ModelSummary s;
        s.model = models[m];
        double wait = 0.0;
        int waits = 0;
        for (const auto& run : runs[m]) {
            s.served_per_period += run.metrics.mean_served();
            s.platform_earnings += run.metrics.platform_earnings();
            s.driver_profit += run.metrics.driver_profit();
            if (auto w = run.metrics.mean_wait()) {
                wait += *w;
                ++waits;
            }
        }
        const double n = static_cast<double>(std::max<std::size_t>(runs[m].size(), 1));
        s.served_per_period /= n;
        s.platform_earnings /= n;
        s.driver_profit /= n;
        if (waits > 0) s.mean_wait = wait / waits;
        rows.push_back(s);
    }
    return rows;
}

ExperimentResult run_experiment(const ScenarioBundle& bundle, const std::vector<rebalance::Model>& models,
                                long long n_periods, const std::vector<std::uint64_t>& seeds,
                                const ExperimentOptions& options) {
    if (n_periods < 0) throw InputError("number of periods must be nonnegative");
    bundle.validate();
    ExperimentResult result;
    result.scenario = bundle.name;
    result.n_periods = n_periods;
    result.models = models;
    result.seeds = seeds;
    result.runs.assign(models.size(), std::vector<RunResult>(seeds.size()));

    const std::size_t tasks = models.size() * seeds.size();
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            const std::size_t m = t / seeds.size();
            const std::size_t s = t % seeds.size();
            try {
                result.runs[m][s] = simulate(bundle, models[m], n_periods, seeds[s], options.log_events);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = tasks;
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(std::max<std::size_t>(tasks, 1))));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return result;
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? csv::format(*v) : std::string(); }

}  // namespace

void write_period_csv(std::ostream& out, const ExperimentResult& r) {
    csv::Writer w(out);
    w.row({"model", "seed", "period", "arrived", "served", "mean_wait", "fares", "platform_earnings", "driver_profit",
           "rebalancing_km", "trip_km", "idle_drivers", "recommendations", "accepted", "repositioned"});
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        for (std::size_t s = 0; s < r.seeds.size(); ++s) {
            for (const auto& p : r.runs[m][s].metrics.periods) {
                w.row({std::string(rebalance::to_string(r.models[m])), std::to_string(r.seeds[s]),
                       std::to_string(p.period_index), std::to_string(p.arrived), std::to_string(p.served),
                       optional_number(p.mean_wait()), csv::format(p.fares), csv::format(p.platform_earnings),
                       csv::format(p.driver_profit), csv::format(p.rebalancing_km), csv::format(p.trip_km),
                       std::to_string(p.idle_drivers), std::to_string(p.recommendations), std::to_string(p.accepted),
                       std::to_string(p.repositioned)});
            }
        }
    }
}

void write_run_csv(std::ostream& out, const ExperimentResult& r) {
    csv::Writer w(out);
    w.row({"model", "seed", "periods", "arrived", "served", "served_per_period", "mean_wait", "platform_earnings",
           "driver_profit"});
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        for (std::size_t s = 0; s < r.seeds.size(); ++s) {
            const auto& mt = r.runs[m][s].metrics;
            w.row({std::string(rebalance::to_string(r.models[m])), std::to_string(r.seeds[s]),
                   std::to_string(mt.periods.size()), std::to_string(mt.arrived()), std::to_string(mt.served()),
                   csv::format(mt.mean_served()), optional_number(mt.mean_wait()), csv::format(mt.platform_earnings()),
                   csv::format(mt.driver_profit())});
        }
    }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& r) {
    csv::Writer w(out);
    w.row({"model", "seeds", "served_per_period", "mean_wait", "platform_earnings", "driver_profit"});
    for (const auto& s : r.summary()) {
        w.row({std::string(rebalance::to_string(s.model)), std::to_string(r.seeds.size()),
               csv::format(s.served_per_period), optional_number(s.mean_wait), csv::format(s.platform_earnings),
               csv::format(s.driver_profit)});
    }
}

void write_metrics_json(std::ostream& out, const ExperimentResult& r) {
    nlohmann::json j;
    j["scenario"] = r.scenario;
    j["periods"] = r.n_periods;
    j["seeds"] = r.seeds;
    j["models"] = nlohmann::json::array();
    const auto summary = r.summary();
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        nlohmann::json jm;
        jm["model"] = rebalance::to_string(r.models[m]);
        jm["served_per_period"] = summary[m].served_per_period;
        jm["mean_wait"] = summary[m].mean_wait ? nlohmann::json(*summary[m].mean_wait) : nlohmann::json();
        jm["platform_earnings"] = summary[m].platform_earnings;
        jm["driver_profit"] = summary[m].driver_profit;
        jm["runs"] = nlohmann::json::array();
        for (std::size_t s = 0; s < r.seeds.size(); ++s) {
            const auto& mt = r.runs[m][s].metrics;
            nlohmann::json run;
            run["seed"] = r.seeds[s];
            run["arrived"] = mt.arrived();
            run["served"] = mt.served();
            run["served_per_period"] = mt.mean_served();
            run["mean_wait"] = mt.mean_wait() ? nlohmann::json(*mt.mean_wait()) : nlohmann::json();
            run["platform_earnings"] = mt.platform_earnings();
            run["driver_profit"] = mt.driver_profit();
            jm["runs"].push_back(std::move(run));
        }
        j["models"].push_back(std::move(jm));
    }
    out << j.dump(2) << '\n';
}

void write_event_log(std::ostream& out, const ExperimentResult& r) {
    csv::Writer w(out);
    w.row({"model", "seed", "period", "driver", "action", "outcome"});
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        for (std::size_t s = 0; s < r.seeds.size(); ++s) {
            for (const auto& e : r.runs[m][s].events) {
                w.row({std::string(rebalance::to_string(r.models[m])), std::to_string(r.seeds[s]),
                       std::to_string(e.period), std::to_string(e.driver), e.action, e.outcome});
            }
        }
    }
}

}  // namespace aavr::sim
