#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aavr/behavior.hpp"
#include "aavr/rebalance.hpp"
#include "aavr/scenarios.hpp"
#include "aavr/stochastic.hpp"

namespace aavr::sim {

/// Fleet and open requests at the start of a period.
struct PeriodState {
    long long period_index = 0;
    /// Arrival minute of every open request, per region.
    std::vector<std::vector<double>> open_requests;
    std::vector<behavior::DriverAgent> drivers;
    stochastic::DemandHistory history;

    std::size_t count(behavior::DriverActivity activity) const;
};

PeriodState initial_state(const ScenarioBundle& bundle);

struct DriverCounters {
    long long recommended = 0;  // told to move to another region
    long long accepted = 0;     // and did
    long long allocated = 0;    // picked up a request

    bool operator==(const DriverCounters&) const = default;
};

struct PeriodMetrics {
    long long period_index = 0;
    long long arrived = 0;
    long long served = 0;
    double total_wait = 0.0;
    double fares = 0.0;
    double platform_earnings = 0.0;
    double driver_profit = 0.0;
    double rebalancing_km = 0.0;
    double trip_km = 0.0;
    long long idle_drivers = 0;     // idle when the recommender ran
    long long recommendations = 0;  // move recommendations issued
    long long accepted = 0;
    long long repositioned = 0;     // drivers that set off for another region
    long long solver_nodes = 0;
    /// Drivers that reached each region within the period and found no
    /// request left.
    std::vector<long long> idle_arrivals;

    /// Absent when nothing was served.
    std::optional<double> mean_wait() const;
};

struct SimMetrics {
    std::vector<PeriodMetrics> periods;
    std::vector<DriverCounters> drivers;

    long long arrived() const;
    long long served() const;
    /// Served requests per period.
    double mean_served() const;
    std::optional<double> mean_wait() const;
    double fares() const;
    double platform_earnings() const;
    double driver_profit() const;
};

struct Event {
    long long period = 0;
    std::size_t driver = 0;
    std::string action;
    std::string outcome;
};

struct PeriodResult {
    PeriodState state;
    PeriodMetrics metrics;
    std::vector<DriverCounters> counters;  // this period only
    std::vector<Event> events;
};

/// The recommender failed in a period; the state was left as it was.
class PeriodError : public std::runtime_error {
public:
    PeriodError(long long period, const std::string& what, milp::Status status)
        : std::runtime_error("period " + std::to_string(period) + ": " + what), period_(period), status_(status) {}
    long long period() const { return period_; }
    milp::Status status() const { return status_; }

private:
    long long period_;
    milp::Status status_;
};

/// One planning period: demand, first-batch pickups, recommendation,
/// driver decisions, travel, pickups on arrival, belief updates, expiry.
/// Every draw comes from a stream labelled by (seed, purpose, period, id), so
/// different models see the same demand and the same coin flips.
PeriodResult run_period(const PeriodState& state, const ScenarioBundle& bundle, rebalance::Model model,
                        const ScenarioConfig& config, std::uint64_t seed, bool log_events = false);

/// Belief update after a repositioning: a followed recommendation updates the
/// system belief, a self-directed move the driver's own.
void record_outcome(behavior::DriverAgent& agent, bool accepted, bool allocated, const ScenarioConfig& config);

struct RunResult {
    SimMetrics metrics;
    std::vector<Event> events;
    PeriodState final_state;
};

RunResult simulate(const ScenarioBundle& bundle, rebalance::Model model, long long n_periods, std::uint64_t seed,
                   bool log_events = false);

struct ExperimentOptions {
    unsigned jobs = 1;
    bool log_events = false;
};

struct ModelSummary {
    rebalance::Model model{};
    double served_per_period = 0.0;
    std::optional<double> mean_wait;
    double platform_earnings = 0.0;
    double driver_profit = 0.0;
};

struct ExperimentResult {
    std::string scenario;
    long long n_periods = 0;
    std::vector<rebalance::Model> models;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<RunResult>> runs;  // [model][seed]

    /// Per-model averages over seeds.
    std::vector<ModelSummary> summary() const;
};

/// Every model against every seed on common random numbers.  Runs are
/// spread over `jobs` threads; results do not depend on the thread count.
ExperimentResult run_experiment(const ScenarioBundle& bundle, const std::vector<rebalance::Model>& models,
                                long long n_periods, const std::vector<std::uint64_t>& seeds,
                                const ExperimentOptions& options = {});

void write_period_csv(std::ostream& out, const ExperimentResult& result);
void write_run_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
void write_metrics_json(std::ostream& out, const ExperimentResult& result);
void write_event_log(std::ostream& out, const ExperimentResult& result);

}  // namespace aavr::sim
