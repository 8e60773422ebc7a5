#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aavr {

/// Malformed or out-of-contract input handed to a library call.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A scenario (graph, fleet snapshot, data file) that cannot be used as given.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RegionId {
    std::size_t index = 0;
    auto operator<=>(const RegionId&) const = default;
};

struct DriverId {
    std::size_t index = 0;
    auto operator<=>(const DriverId&) const = default;
};

/// Dense row-major table of doubles.
class Table {
public:
    Table() = default;
    Table(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Table&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct PlanningHorizon {
    double minutes = 5.0;
};

/// Regions with pairwise distance (km), expected travel time and its standard
/// deviation (minutes).
class RegionGraph {
public:
    RegionGraph() = default;
    RegionGraph(Table distance_km, Table expected_minutes, Table stddev_minutes);

    /// Graph whose travel-time deviations are all zero.
    static RegionGraph deterministic(Table distance_km, Table expected_minutes);

    std::size_t n_regions() const { return distance_.rows(); }
    double distance(RegionId from, RegionId to) const { return distance_(from.index, to.index); }
    double travel_time(RegionId from, RegionId to) const { return tau_(from.index, to.index); }
    double travel_stddev(RegionId from, RegionId to) const { return eps_(from.index, to.index); }

    const Table& distance_table() const { return distance_; }
    const Table& travel_time_table() const { return tau_; }
    const Table& travel_stddev_table() const { return eps_; }

    double max_distance() const;
    double max_travel_time() const;

    bool operator==(const RegionGraph&) const = default;

private:
    Table distance_;
    Table tau_;
    Table eps_;
};

/// Every tunable of the models and the simulator.  Key names in config files
/// match the member names.
struct ScenarioConfig {
    PlanningHorizon horizon{5.0};
    double beta = 1e-4;       // travel penalty in AAVR and B2
    double rho = 1.0;         // B1 saturation factor
    std::optional<double> gamma;  // B4 unmet-demand penalty; unset = 1e4 * max distance
    double b4_beta = 1.0;     // B4 allocation-distance weight
    double epsilon0 = 1.0;
    double epsilon1 = 1.0;
    int M = 1000;
    double fare_base = 2.5;
    double fare_per_km = 1.5;
    double cost_per_km = 0.3;
    double commission_rate = 0.2;
    unsigned long long seed = 42;

    // Fidelity switches for the printed baseline formulations.
    bool b2_literal_sign = false;   // use "- beta * distance" inside the B2 minimisation
    bool literal_net_flow = false;  // zero the net-flow term in B3/B4 balance rows
    bool aavr_tiebreak = true;      // second AAVR pass preferring confident movers

    double demand_multiplier = 1.0;   // Optimistic 1.2 / Neutral 1.0 / Pessimistic 0.8
    int history_window = 2016;        // forecaster look-back, in periods
    double min_trip_minutes = 3.0;
    double min_trip_km = 1.0;
    long long node_limit = 200000;
    double mip_relative_gap = 0.0;

    double gamma_for(const RegionGraph& graph) const;
    void validate() const;
};

/// Fraction of ordered region pairs (diagonal included) whose expected travel
/// time fits in the horizon.
double reachability_fraction(const RegionGraph& graph, PlanningHorizon horizon);

}  // namespace aavr
