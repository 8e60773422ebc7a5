#include "aavr/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aavr {

namespace {

void check_table(const Table& t, std::size_t n, const char* name) {
    if (t.rows() != n || t.cols() != n) {
        throw InputError(std::string("region graph: ") + name + " table must be " +
                         std::to_string(n) + "x" + std::to_string(n));
    }
    for (double v : t.data()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InputError(std::string("region graph: ") + name +
                             " entries must be finite and nonnegative");
        }
    }
}

double table_max(const Table& t) {
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, v);
    return m;
}

}  // namespace

RegionGraph::RegionGraph(Table distance_km, Table expected_minutes, Table stddev_minutes)
    : distance_(std::move(distance_km)), tau_(std::move(expected_minutes)),
      eps_(std::move(stddev_minutes)) {
    const std::size_t n = distance_.rows();
    if (n == 0) throw InputError("region graph: at least one region is required");
    check_table(distance_, n, "distance");
    check_table(tau_, n, "travel time");
    check_table(eps_, n, "travel time stddev");
    for (std::size_t i = 0; i < n; ++i) {
        if (distance_(i, i) != 0.0 || tau_(i, i) != 0.0) {
            throw InputError("region graph: diagonal of distance and travel time must be 0");
        }
    }
}

RegionGraph RegionGraph::deterministic(Table distance_km, Table expected_minutes) {
    Table eps(distance_km.rows(), distance_km.cols(), 0.0);
    return RegionGraph(std::move(distance_km), std::move(expected_minutes), std::move(eps));
}

double RegionGraph::max_distance() const { return table_max(distance_); }
double RegionGraph::max_travel_time() const { return table_max(tau_); }

double ScenarioConfig::gamma_for(const RegionGraph& graph) const {
    if (gamma) return *gamma;
    return 1e4 * std::max(graph.max_distance(), 1.0);
}

void ScenarioConfig::validate() const {
    if (!(horizon.minutes > 0.0)) throw InputError("config: horizon must be positive");
    if (beta < 0.0 || rho < 0.0 || b4_beta < 0.0) {
        throw InputError("config: beta, rho and b4_beta must be nonnegative");
    }
    if (gamma && *gamma < 0.0) throw InputError("config: gamma must be nonnegative");
    if (epsilon0 < 0.0 || epsilon1 < 0.0) {
        throw InputError("config: epsilon0 and epsilon1 must be nonnegative");
    }
    if (M < 1) throw InputError("config: M must be at least 1");
    if (commission_rate < 0.0 || commission_rate > 1.0) {
        throw InputError("config: commission_rate must lie in [0,1]");
    }
    if (demand_multiplier < 0.0) throw InputError("config: demand_multiplier must be nonnegative");
    if (history_window < 1) throw InputError("config: history_window must be at least 1");
    if (node_limit < 1) throw InputError("config: node_limit must be at least 1");
    if (!(mip_relative_gap >= 0.0 && mip_relative_gap < 1.0)) {
        throw InputError("config: mip_relative_gap must lie in [0,1)");
    }
}

double reachability_fraction(const RegionGraph& graph, PlanningHorizon horizon) {
    const std::size_t n = graph.n_regions();
    std::size_t reachable = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (graph.travel_time({i}, {j}) <= horizon.minutes) ++reachable;
        }
    }
    return static_cast<double>(reachable) / static_cast<double>(n * n);
}

}  // namespace aavr
