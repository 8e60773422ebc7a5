#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aavr/core.hpp"
#include "aavr/milp.hpp"

namespace aavr::rebalance {

/// A rebalancing program that did not produce a usable optimum.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, milp::Status status)
        : std::runtime_error(what), status_(status) {}
    milp::Status status() const { return status_; }

private:
    milp::Status status_;
};

/// An idle driver as the optimiser sees it.
struct IdleDriver {
    DriverId id;
    RegionId region;
    double mu = 0.5;                 // acceptance probability
    std::vector<double> preference;  // L_c over regions
};

struct FleetSnapshot {
    std::vector<IdleDriver> drivers;
    std::vector<double> nu;  // expected demand per region
    RegionGraph graph;
    PlanningHorizon horizon;
    ScenarioConfig config;

    std::size_t n_regions() const { return graph.n_regions(); }
    /// Throws InputError when dimensions, mu or L are out of contract.
    void validate() const;
    /// Idle drivers per region (V_i).
    std::vector<long long> drivers_per_region() const;
};

enum class Model { aavr, b1, b2, b3, b4 };

inline constexpr Model kAllModels[] = {Model::aavr, Model::b1, Model::b2, Model::b3, Model::b4};

std::string_view to_string(Model model);
/// Accepts "aavr", "b1".."b4" (case-insensitive).  Throws InputError.
Model parse_model(std::string_view name);

struct RecommendationPlan {
    /// Recommended region per snapshot driver (own region = stay).
    std::vector<RegionId> destination;
    std::vector<double> expected_supply;
    std::vector<double> expected_allocation;
    double objective_value = 0.0;
    milp::Status status = milp::Status::optimal;
    long long nodes = 0;

    std::size_t recommended_to(RegionId region, const FleetSnapshot& snapshot) const;
    /// Drivers told to leave their current region.
    std::size_t moves(const FleetSnapshot& snapshot) const;
};

/// Integer region-to-region flow table X_ij.
class AggregateFlow {
public:
    AggregateFlow() = default;
    explicit AggregateFlow(std::size_t n_regions) : n_(n_regions), counts_(n_regions * n_regions, 0) {}

    std::size_t n_regions() const { return n_; }
    long long& at(std::size_t from, std::size_t to) { return counts_[from * n_ + to]; }
    long long at(std::size_t from, std::size_t to) const { return counts_[from * n_ + to]; }
    long long outflow(std::size_t from) const;
    long long total_moves() const;

    bool operator==(const AggregateFlow&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<long long> counts_;
};

/// Variable layout of a driver-level program.
struct DriverProgram {
    milp::LinearProgram program;
    std::vector<std::vector<int>> x;  // x[c][j]
    std::vector<int> z;               // AAVR expected-allocation variables
    std::vector<int> count;           // per-region assignment counts
};

/// Region-level program.  B1 and B2 keep stays on the diagonal of X.
struct FlowProgram {
    milp::LinearProgram program;
    std::vector<std::vector<int>> x;  // X[i][j]; -1 where absent
    std::vector<std::vector<int>> y;  // B4 Y[i][j]; -1 where absent
};

DriverProgram build_aavr(const FleetSnapshot& snapshot);
FlowProgram build_b1(const FleetSnapshot& snapshot);
FlowProgram build_b2(const FleetSnapshot& snapshot);
FlowProgram build_b3(const FleetSnapshot& snapshot);
FlowProgram build_b4(const FleetSnapshot& snapshot);

RecommendationPlan solve_aavr(const FleetSnapshot& snapshot);
RecommendationPlan solve_b1(const FleetSnapshot& snapshot);
RecommendationPlan solve_b2(const FleetSnapshot& snapshot);
AggregateFlow solve_b3(const FleetSnapshot& snapshot);
AggregateFlow solve_b4(const FleetSnapshot& snapshot);

/// Assigns exactly X_ij drivers of region i to region j, lowest DriverId
/// first; everyone else stays.
RecommendationPlan flows_to_drivers(const AggregateFlow& flow, const FleetSnapshot& snapshot);

/// Dispatch to the chosen model; aggregate models go through flows_to_drivers.
RecommendationPlan recommend(Model model, const FleetSnapshot& snapshot);

/// The program a model would solve, for export.
milp::LinearProgram build_program(Model model, const FleetSnapshot& snapshot);

/// E[s_j] and xi_j = min(E[s_j], nu_j) for the given destinations.
void fill_expectations(RecommendationPlan& plan, const FleetSnapshot& snapshot);

void write_plan_csv(std::ostream& out, const RecommendationPlan& plan, const FleetSnapshot& snapshot);
void write_flow_csv(std::ostream& out, const AggregateFlow& flow);

}  // namespace aavr::rebalance
