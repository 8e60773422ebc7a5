#include "aavr/rebalance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

namespace aavr::rebalance {

using milp::Relation;
using milp::Term;
using milp::VarType;

namespace {

std::string driver_label(const IdleDriver& d) { return std::to_string(d.id.index); }

bool reachable(const FleetSnapshot& s, std::size_t from, std::size_t to) {
    return s.graph.travel_time({from}, {to}) <= s.horizon.minutes;
}

double total_demand_of(const std::vector<double>& nu) {
    double total = 0.0;
    for (double v : nu) total += v;
    return total;
}

double total_demand(const FleetSnapshot& s) { return total_demand_of(s.nu); }

/// Largest-remainder split of n drivers in proportion to demand; equal
/// remainders go to the lower region index.
std::vector<double> apportion(const std::vector<double>& nu, std::size_t n) {
    const double total = total_demand_of(nu);
    std::vector<double> share(nu.size());
    std::vector<std::size_t> order(nu.size());
    long long assigned = 0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double exact = nu[i] / total * static_cast<double>(n);
        share[i] = std::floor(exact + 1e-9);
        assigned += static_cast<long long>(share[i]);
        order[i] = i;
    }
    auto remainder = [&](std::size_t i) { return nu[i] / total * static_cast<double>(n) - share[i]; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder(a) > remainder(b); });
    for (std::size_t k = 0; assigned < static_cast<long long>(n) && k < order.size(); ++k, ++assigned) share[order[k]] += 1.0;
    return share;
}

milp::MilpOptions milp_options(const FleetSnapshot& s) {
    milp::MilpOptions opt;
    opt.node_limit = s.config.node_limit;
    opt.tolerances.relative_gap = s.config.mip_relative_gap;
    return opt;
}

/// x[c][j] binaries (unreachable ones fixed to 0), per-region count integers
/// N_j = sum_c x[c][j] and per origin-destination move counts.  The counts
/// are an exact reformulation that gives branch and bound strong first
/// branching decisions.
void add_assignment_variables(DriverProgram& dp, const FleetSnapshot& s, bool require_reachable_option) {
    const std::size_t R = s.n_regions();
    auto& lp = dp.program;
    dp.x.assign(s.drivers.size(), std::vector<int>(R, -1));
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        const auto& d = s.drivers[c];
        bool any = false;
        for (std::size_t j = 0; j < R; ++j) {
            const bool ok = reachable(s, d.region.index, j);
            any |= ok;
            dp.x[c][j] = lp.add_variable("x_" + driver_label(d) + "_" + std::to_string(j), 0.0, ok ? 1.0 : 0.0,
                                         VarType::binary);
            // Move decisions are branched before stay decisions.
            if (j == d.region.index) lp.variables[static_cast<std::size_t>(dp.x[c][j])].branch_priority = -1;
        }
        if (require_reachable_option && !any) {
            throw ScenarioError("driver " + driver_label(d) + " has no region reachable within the horizon");
        }
    }
    dp.count.resize(R);
    for (std::size_t j = 0; j < R; ++j) {
        dp.count[j] = lp.add_variable("n_" + std::to_string(j), 0.0, static_cast<double>(s.drivers.size()),
                                      VarType::integer);
        lp.variables[static_cast<std::size_t>(dp.count[j])].branch_priority = 2;
        std::vector<Term> row{{dp.count[j], 1.0}};
        for (std::size_t c = 0; c < s.drivers.size(); ++c) row.push_back({dp.x[c][j], -1.0});
        lp.add_constraint("count_" + std::to_string(j), std::move(row), Relation::equal, 0.0);
    }
    // Origin-destination counts break the symmetry between drivers that
    // share a region.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<Term>> od_rows;
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        const std::size_t i = s.drivers[c].region.index;
        for (std::size_t j = 0; j < R; ++j) {
            if (j != i && lp.variables[static_cast<std::size_t>(dp.x[c][j])].hi > 0.0) {
                od_rows[{i, j}].push_back({dp.x[c][j], -1.0});
            }
        }
    }
    for (auto& [key, row] : od_rows) {
        const std::string name = std::to_string(key.first) + "_" + std::to_string(key.second);
        const int v = lp.add_variable("m_" + name, 0.0, static_cast<double>(row.size()), VarType::integer);
        lp.variables[static_cast<std::size_t>(v)].branch_priority = 1;
        row.push_back({v, 1.0});
        lp.add_constraint("moves_" + name, std::move(row), Relation::equal, 0.0);
    }
}

void add_one_per_driver(DriverProgram& dp, const FleetSnapshot& s, Relation rel) {
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        std::vector<Term> row;
        for (int v : dp.x[c]) row.push_back({v, 1.0});
        dp.program.add_constraint("assign_" + driver_label(s.drivers[c]), std::move(row), rel, 1.0);
    }
}

/// Position of each driver in ascending DriverId order.
std::vector<std::size_t> driver_ranks(const FleetSnapshot& s) {
    std::vector<std::size_t> order(s.drivers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.drivers[a].id < s.drivers[b].id; });
    std::vector<std::size_t> rank(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
    return rank;
}

RecommendationPlan plan_from(const DriverProgram& dp, const milp::Solution& sol, const FleetSnapshot& s,
                             const char* model) {
    if (sol.values.empty()) {
        throw SolveError(std::string(model) + " program is " + milp::to_string(sol.status), sol.status);
    }
    RecommendationPlan plan;
    plan.status = sol.status;
    plan.nodes = sol.nodes;
    plan.objective_value = sol.objective_value;
    plan.destination.resize(s.drivers.size());
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        plan.destination[c] = s.drivers[c].region;  // unassigned drivers stay
        for (std::size_t j = 0; j < dp.x[c].size(); ++j) {
            if (sol.values[static_cast<std::size_t>(dp.x[c][j])] > 0.5) plan.destination[c] = RegionId{j};
        }
    }
    fill_expectations(plan, s);
    return plan;
}

AggregateFlow flow_from(const FlowProgram& fp, const milp::Solution& sol, std::size_t R, const char* model) {
    if (sol.values.empty()) {
        throw SolveError(std::string(model) + " program is " + milp::to_string(sol.status), sol.status);
    }
    AggregateFlow flow(R);
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            const int v = fp.x[i][j];
            if (v >= 0) flow.at(i, j) = std::llround(sol.values[static_cast<std::size_t>(v)]);
        }
    }
    return flow;
}

RecommendationPlan plan_from_counts(const FlowProgram& fp, const milp::Solution& sol, const FleetSnapshot& s,
                                    const char* model) {
    RecommendationPlan plan = flows_to_drivers(flow_from(fp, sol, s.n_regions(), model), s);
    plan.status = sol.status;
    plan.nodes = sol.nodes;
    plan.objective_value = sol.objective_value;
    return plan;
}

}  // namespace

void FleetSnapshot::validate() const {
    const std::size_t R = graph.n_regions();
    if (R == 0) throw InputError("snapshot has no regions");
    if (nu.size() != R) throw InputError("snapshot demand vector does not match the region count");
    for (double v : nu) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("snapshot demand must be finite and nonnegative");
    }
    if (!(horizon.minutes > 0.0)) throw InputError("snapshot horizon must be positive");
    for (const auto& d : drivers) {
        if (d.region.index >= R) throw InputError("driver " + driver_label(d) + " stands in an unknown region");
        if (!(d.mu >= 0.0 && d.mu <= 1.0)) throw InputError("driver " + driver_label(d) + " has mu outside [0,1]");
        if (d.preference.size() != R) {
            throw InputError("driver " + driver_label(d) + " preference vector has the wrong length");
        }
        double total = 0.0;
        for (double p : d.preference) {
            if (p < 0.0) throw InputError("driver " + driver_label(d) + " has a negative preference");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw InputError("driver " + driver_label(d) + " preference does not sum to 1");
        }
    }
}

std::vector<long long> FleetSnapshot::drivers_per_region() const {
    std::vector<long long> v(graph.n_regions(), 0);
    for (const auto& d : drivers) ++v[d.region.index];
    return v;
}

std::string_view to_string(Model model) {
    switch (model) {
        case Model::aavr: return "aavr";
        case Model::b1: return "b1";
        case Model::b2: return "b2";
        case Model::b3: return "b3";
        case Model::b4: return "b4";
    }
    return "?";
}

Model parse_model(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Model m : kAllModels) {
        if (to_string(m) == lower) return m;
    }
    throw InputError("unknown model '" + std::string(name) + "' (expected aavr, b1, b2, b3 or b4)");
}

std::size_t RecommendationPlan::recommended_to(RegionId region, const FleetSnapshot& snapshot) const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < destination.size(); ++c) {
        if (destination[c] == region && snapshot.drivers[c].region != region) ++n;
    }
    return n;
}

std::size_t RecommendationPlan::moves(const FleetSnapshot& snapshot) const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < destination.size(); ++c) {
        if (destination[c] != snapshot.drivers[c].region) ++n;
    }
    return n;
}

long long AggregateFlow::outflow(std::size_t from) const {
    long long total = 0;
    for (std::size_t j = 0; j < n_; ++j) {
        if (j != from) total += at(from, j);
    }
    return total;
}

long long AggregateFlow::total_moves() const {
    long long total = 0;
    for (std::size_t i = 0; i < n_; ++i) total += outflow(i);
    return total;
}

void fill_expectations(RecommendationPlan& plan, const FleetSnapshot& s) {
    const std::size_t R = s.n_regions();
    plan.expected_supply.assign(R, 0.0);
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        const auto& d = s.drivers[c];
        plan.expected_supply[plan.destination[c].index] += d.mu;
        for (std::size_t j = 0; j < R; ++j) plan.expected_supply[j] += (1.0 - d.mu) * d.preference[j];
    }
    plan.expected_allocation.resize(R);
    for (std::size_t j = 0; j < R; ++j) plan.expected_allocation[j] = std::min(plan.expected_supply[j], s.nu[j]);
}

DriverProgram build_aavr(const FleetSnapshot& s) {
    s.validate();
    const std::size_t R = s.n_regions();
    DriverProgram dp;
    auto& lp = dp.program;
    lp.sense = milp::Sense::maximize;
    add_assignment_variables(dp, s, true);
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        const auto& d = s.drivers[c];
        for (std::size_t j = 0; j < R; ++j) {
            lp.variables[static_cast<std::size_t>(dp.x[c][j])].objective =
                -s.config.beta * s.graph.travel_time(d.region, {j});
        }
    }
    add_one_per_driver(dp, s, Relation::equal);
    dp.z.resize(R);
    for (std::size_t j = 0; j < R; ++j) {
        dp.z[j] = lp.add_variable("z_" + std::to_string(j), 0.0, s.nu[j], VarType::continuous, 1.0);
    }
    // Z_j <= sum_c mu_c x_cj + (1 - mu_c) L_cj
    for (std::size_t j = 0; j < R; ++j) {
        std::vector<Term> row{{dp.z[j], 1.0}};
        double passive = 0.0;
        for (std::size_t c = 0; c < s.drivers.size(); ++c) {
            const auto& d = s.drivers[c];
            if (d.mu != 0.0) row.push_back({dp.x[c][j], -d.mu});
            passive += (1.0 - d.mu) * d.preference[j];
        }
        lp.add_constraint("supply_" + std::to_string(j), std::move(row), Relation::less_equal, passive);
    }
    return dp;
}

/// Origin-destination count variables X[i][j] (stays on the diagonal) for
/// models whose coefficients depend on regions only.  Drivers of one region
/// are interchangeable there, so counts are an exact reformulation.
FlowProgram count_program(const FleetSnapshot& s, Relation per_region) {
    const std::size_t R = s.n_regions();
    const auto V = s.drivers_per_region();
    FlowProgram fp;
    auto& lp = fp.program;
    fp.x.assign(R, std::vector<int>(R, -1));
    for (std::size_t i = 0; i < R; ++i) {
        if (V[i] == 0) continue;
        std::vector<Term> row;
        for (std::size_t j = 0; j < R; ++j) {
            const bool ok = reachable(s, i, j);
            fp.x[i][j] = lp.add_variable("X_" + std::to_string(i) + "_" + std::to_string(j), 0.0,
                                         ok ? static_cast<double>(V[i]) : 0.0, VarType::integer);
            row.push_back({fp.x[i][j], 1.0});
        }
        lp.add_constraint("assign_" + std::to_string(i), std::move(row), per_region, static_cast<double>(V[i]));
    }
    return fp;
}

FlowProgram build_b1(const FleetSnapshot& s) {
    s.validate();
    const std::size_t R = s.n_regions();
    const double H = s.horizon.minutes;
    FlowProgram fp = count_program(s, Relation::less_equal);
    auto& lp = fp.program;
    lp.sense = milp::Sense::maximize;
    for (std::size_t j = 0; j < R; ++j) {
        std::vector<Term> row;
        for (std::size_t i = 0; i < R; ++i) {
            const int v = fp.x[i][j];
            if (v < 0) continue;
            const double slack = 1.0 - s.graph.travel_time({i}, {j}) / H;
            lp.variables[static_cast<std::size_t>(v)].objective = s.nu[j] * slack;
            if (slack != 0.0) row.push_back({v, slack});
        }
        lp.add_constraint("saturation_" + std::to_string(j), std::move(row), Relation::less_equal,
                          s.config.rho * s.nu[j]);
    }
    return fp;
}

FlowProgram build_b2(const FleetSnapshot& s) {
    s.validate();
    const std::size_t R = s.n_regions();
    const double N = static_cast<double>(s.drivers.size());
    const double demand = total_demand(s);
    if (s.drivers.empty()) throw ScenarioError("B2 needs at least one idle driver");
    if (!(demand > 0.0)) throw ScenarioError("B2 needs positive total demand");
    for (const auto& d : s.drivers) {
        bool any = false;
        for (std::size_t j = 0; j < R; ++j) any |= reachable(s, d.region.index, j);
        if (!any) throw ScenarioError("driver " + driver_label(d) + " has no region reachable within the horizon");
    }
    FlowProgram fp = count_program(s, Relation::equal);
    auto& lp = fp.program;
    lp.sense = milp::Sense::minimize;
    const double distance_sign = s.config.b2_literal_sign ? -1.0 : 1.0;
    for (std::size_t j = 0; j < R; ++j) {
        const std::string k = std::to_string(j);
        // Arrivals n_j are branched on before the individual flows.
        const int n = lp.add_variable("n_" + k, 0.0, N, VarType::integer);
        lp.variables[static_cast<std::size_t>(n)].branch_priority = 1;
        std::vector<Term> arrivals{{n, 1.0}};
        for (std::size_t i = 0; i < R; ++i) {
            const int v = fp.x[i][j];
            if (v < 0) continue;
            lp.variables[static_cast<std::size_t>(v)].objective =
                distance_sign * s.config.beta * s.graph.distance({i}, {j});
            arrivals.push_back({v, -1.0});
        }
        lp.add_constraint("arrivals_" + k, std::move(arrivals), Relation::equal, 0.0);
        const int t = lp.add_variable("t_" + k, 0.0, milp::kInfinity, VarType::continuous, 1.0);
        const double target = s.nu[j] / demand;
        // t_j >= n_j / N - target  and  t_j >= target - n_j / N
        lp.add_constraint("dev_hi_" + k, {{t, 1.0}, {n, -1.0 / N}}, Relation::greater_equal, -target);
        lp.add_constraint("dev_lo_" + k, {{t, 1.0}, {n, 1.0 / N}}, Relation::greater_equal, target);
    }
    return fp;
}

FlowProgram build_b3(const FleetSnapshot& s) {
    s.validate();
    const std::size_t R = s.n_regions();
    const double demand = total_demand(s);
    if (!(demand > 0.0)) throw ScenarioError("B3 needs positive total demand");
    const auto V = s.drivers_per_region();
    FlowProgram fp;
    auto& lp = fp.program;
    lp.sense = milp::Sense::minimize;
    fp.x.assign(R, std::vector<int>(R, -1));
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            if (i == j) continue;
            fp.x[i][j] = lp.add_variable("X_" + std::to_string(i) + "_" + std::to_string(j), 0.0,
                                         static_cast<double>(V[i]), VarType::integer,
                                         s.graph.travel_time({i}, {j}));
        }
    }
    const auto target = apportion(s.nu, s.drivers.size());
    const double net = s.config.literal_net_flow ? 0.0 : 1.0;
    for (std::size_t i = 0; i < R; ++i) {
        std::vector<Term> balance, out;
        for (std::size_t j = 0; j < R; ++j) {
            if (i == j) continue;
            if (net != 0.0) {
                balance.push_back({fp.x[j][i], net});
                balance.push_back({fp.x[i][j], -net});
            }
            out.push_back({fp.x[i][j], 1.0});
        }
        lp.add_constraint("balance_" + std::to_string(i), std::move(balance), Relation::greater_equal,
                          target[i] - static_cast<double>(V[i]));
        lp.add_constraint("outflow_" + std::to_string(i), std::move(out), Relation::less_equal,
                          static_cast<double>(V[i]));
    }
    return fp;
}

FlowProgram build_b4(const FleetSnapshot& s) {
    s.validate();
    const std::size_t R = s.n_regions();
    const auto V = s.drivers_per_region();
    const double gamma = s.config.gamma_for(s.graph);
    constexpr double allocation_reach = 0.0;  // w: only same-region allocation
    FlowProgram fp;
    auto& lp = fp.program;
    lp.sense = milp::Sense::minimize;
    fp.x.assign(R, std::vector<int>(R, -1));
    fp.y.assign(R, std::vector<int>(R, -1));
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            if (i != j) {
                const bool ok = reachable(s, i, j);
                fp.x[i][j] = lp.add_variable("X_" + std::to_string(i) + "_" + std::to_string(j), 0.0,
                                             ok ? static_cast<double>(V[i]) : 0.0, VarType::integer,
                                             s.graph.distance({i}, {j}));
            }
            if (s.graph.travel_time({i}, {j}) <= allocation_reach) {
                fp.y[i][j] = lp.add_variable("Y_" + std::to_string(i) + "_" + std::to_string(j), 0.0,
                                             std::floor(s.nu[i] + 1e-9), VarType::integer,
                                             s.config.b4_beta * s.graph.distance({j}, {i}));
            }
        }
    }
    std::vector<int> S(R), T(R);
    for (std::size_t i = 0; i < R; ++i) {
        S[i] = lp.add_variable("S_" + std::to_string(i), 0.0, milp::kInfinity, VarType::continuous);
        T[i] = lp.add_variable("T_" + std::to_string(i), 0.0, milp::kInfinity, VarType::continuous, gamma);
    }
    const double net = s.config.literal_net_flow ? 0.0 : 1.0;
    for (std::size_t i = 0; i < R; ++i) {
        std::vector<Term> served_here{{S[i], -1.0}}, served_of_i, out;
        std::vector<Term> unmet{{T[i], 1.0}};
        std::vector<Term> supply{{S[i], 1.0}};
        for (std::size_t j = 0; j < R; ++j) {
            if (fp.y[j][i] >= 0) served_here.push_back({fp.y[j][i], 1.0});
            if (fp.y[i][j] >= 0) {
                served_of_i.push_back({fp.y[i][j], 1.0});
                unmet.push_back({fp.y[i][j], 1.0});
            }
            if (i != j) {
                out.push_back({fp.x[i][j], 1.0});
                if (net != 0.0) {
                    supply.push_back({fp.x[j][i], -net});
                    supply.push_back({fp.x[i][j], net});
                }
            }
        }
        const std::string k = std::to_string(i);
        lp.add_constraint("alloc_supply_" + k, std::move(served_here), Relation::less_equal, 0.0);
        lp.add_constraint("alloc_demand_" + k, std::move(served_of_i), Relation::less_equal, s.nu[i]);
        lp.add_constraint("outflow_" + k, std::move(out), Relation::less_equal, static_cast<double>(V[i]));
        lp.add_constraint("unmet_" + k, std::move(unmet), Relation::equal, s.nu[i]);
        lp.add_constraint("supply_" + k, std::move(supply), Relation::equal, static_cast<double>(V[i]));
    }
    return fp;
}

RecommendationPlan solve_aavr(const FleetSnapshot& s) {
    auto dp = build_aavr(s);
    const auto first = milp::solve_milp(dp.program, milp_options(s));
    if (!s.config.aavr_tiebreak || first.status != milp::Status::optimal) return plan_from(dp, first, s, "AAVR");

    // Among optimal plans, prefer moving the most confident drivers (then
    // the lowest ids).
    auto& lp = dp.program;
    std::vector<Term> objective_row;
    for (std::size_t v = 0; v < lp.n_vars(); ++v) {
        if (lp.variables[v].objective != 0.0) objective_row.push_back({static_cast<int>(v), lp.variables[v].objective});
        lp.variables[v].objective = 0.0;
    }
    const double slack = 1e-7 * std::max(1.0, std::abs(first.objective_value));
    lp.add_constraint("optimal_value", std::move(objective_row), Relation::greater_equal,
                      first.objective_value - lp.objective_constant - slack);
    lp.objective_constant = 0.0;
    const auto rank = driver_ranks(s);
    const double n = static_cast<double>(std::max<std::size_t>(s.drivers.size(), 1));
    for (std::size_t c = 0; c < s.drivers.size(); ++c) {
        for (std::size_t j = 0; j < dp.x[c].size(); ++j) {
            if (j == s.drivers[c].region.index) continue;
            lp.variables[static_cast<std::size_t>(dp.x[c][j])].objective =
                s.drivers[c].mu - 1e-9 * static_cast<double>(rank[c]) / n;
        }
    }
    auto second = milp::solve_milp(lp, milp_options(s));
    if (second.values.empty()) return plan_from(dp, first, s, "AAVR");
    second.nodes += first.nodes;
    second.objective_value = first.objective_value;
    return plan_from(dp, second, s, "AAVR");
}

RecommendationPlan solve_b1(const FleetSnapshot& s) {
    const auto fp = build_b1(s);
    return plan_from_counts(fp, milp::solve_milp(fp.program, milp_options(s)), s, "B1");
}

RecommendationPlan solve_b2(const FleetSnapshot& s) {
    const auto fp = build_b2(s);
    return plan_from_counts(fp, milp::solve_milp(fp.program, milp_options(s)), s, "B2");
}

AggregateFlow solve_b3(const FleetSnapshot& s) {
    const auto fp = build_b3(s);
    return flow_from(fp, milp::solve_milp(fp.program, milp_options(s)), s.n_regions(), "B3");
}

AggregateFlow solve_b4(const FleetSnapshot& s) {
    const auto fp = build_b4(s);
    return flow_from(fp, milp::solve_milp(fp.program, milp_options(s)), s.n_regions(), "B4");
}

RecommendationPlan flows_to_drivers(const AggregateFlow& flow, const FleetSnapshot& s) {
    const std::size_t R = s.n_regions();
    if (flow.n_regions() != R) throw InputError("flow table does not match the region count");
    // Drivers of each region in ascending id order.
    std::vector<std::vector<std::size_t>> by_region(R);
    for (std::size_t c = 0; c < s.drivers.size(); ++c) by_region[s.drivers[c].region.index].push_back(c);
    for (auto& members : by_region) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return s.drivers[a].id < s.drivers[b].id; });
    }
    RecommendationPlan plan;
    plan.destination.resize(s.drivers.size());
    for (std::size_t c = 0; c < s.drivers.size(); ++c) plan.destination[c] = s.drivers[c].region;
    for (std::size_t i = 0; i < R; ++i) {
        long long needed = 0;
        for (std::size_t j = 0; j < R; ++j) {
            if (j == i) continue;
            if (flow.at(i, j) < 0) throw InputError("flow table has a negative entry");
            needed += flow.at(i, j);
        }
        if (needed > static_cast<long long>(by_region[i].size())) {
            throw ScenarioError("flow out of region " + std::to_string(i) + " (" + std::to_string(needed) +
                                ") exceeds its " + std::to_string(by_region[i].size()) + " idle drivers");
        }
        std::size_t next = 0;
        for (std::size_t j = 0; j < R; ++j) {
            if (j == i) continue;
            for (long long k = 0; k < flow.at(i, j); ++k) plan.destination[by_region[i][next++]] = RegionId{j};
        }
    }
    fill_expectations(plan, s);
    return plan;
}

RecommendationPlan recommend(Model model, const FleetSnapshot& s) {
    switch (model) {
        case Model::aavr: return solve_aavr(s);
        case Model::b1: return solve_b1(s);
        case Model::b2: return solve_b2(s);
        case Model::b3: return flows_to_drivers(solve_b3(s), s);
        case Model::b4: return flows_to_drivers(solve_b4(s), s);
    }
    throw InputError("unknown model");
}

milp::LinearProgram build_program(Model model, const FleetSnapshot& s) {
    switch (model) {
        case Model::aavr: return build_aavr(s).program;
        case Model::b1: return build_b1(s).program;
        case Model::b2: return build_b2(s).program;
        case Model::b3: return build_b3(s).program;
        case Model::b4: return build_b4(s).program;
    }
    throw InputError("unknown model");
}

void write_plan_csv(std::ostream& out, const RecommendationPlan& plan, const FleetSnapshot& s) {
    out << "driver_id,from_region,to_region,expected_travel_min\n";
    for (std::size_t c = 0; c < plan.destination.size(); ++c) {
        const auto& d = s.drivers[c];
        out << d.id.index << ',' << d.region.index << ',' << plan.destination[c].index << ','
            << s.graph.travel_time(d.region, plan.destination[c]) << '\n';
    }
}

void write_flow_csv(std::ostream& out, const AggregateFlow& flow) {
    out << "from,to,count\n";
    for (std::size_t i = 0; i < flow.n_regions(); ++i) {
        for (std::size_t j = 0; j < flow.n_regions(); ++j) {
            if (i != j && flow.at(i, j) != 0) out << i << ',' << j << ',' << flow.at(i, j) << '\n';
        }
    }
}

}  // namespace aavr::rebalance
