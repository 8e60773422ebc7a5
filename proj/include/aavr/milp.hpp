#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace aavr::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { maximize, minimize };
enum class Relation { less_equal, equal, greater_equal };
enum class VarType { continuous, integer, binary };

struct Variable {
    std::string name;
    double lo = 0.0;
    double hi = kInfinity;
    VarType type = VarType::continuous;
    double objective = 0.0;
    /// Fractional variables with a higher priority are branched on first.
    int branch_priority = 0;

    bool integral() const { return type != VarType::continuous; }
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Relation relation = Relation::less_equal;
    double rhs = 0.0;
};

/// Mixed-integer linear program: objective, rows, bounds, integrality.
class LinearProgram {
public:
    Sense sense = Sense::maximize;
    double objective_constant = 0.0;
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;

    int add_variable(std::string name, double lo, double hi, VarType type, double objective = 0.0);
    int add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs);

    std::size_t n_vars() const { return variables.size(); }
    std::size_t n_rows() const { return constraints.size(); }

    /// Throws InputError on inconsistent dimensions or bounds.
    void validate() const;
    double evaluate(const std::vector<double>& values) const;
    double row_activity(const Constraint& row, const std::vector<double>& values) const;
    /// Largest bound, row or integrality violation of the point.
    double max_violation(const std::vector<double>& values, bool check_integrality) const;
};

enum class Status { optimal, infeasible, unbounded, node_limit };

const char* to_string(Status status);

struct Solution {
    Status status = Status::infeasible;
    std::vector<double> values;
    double objective_value = 0.0;
    long long nodes = 0;
    long long simplex_iterations = 0;
    /// Best bound still open when the search stopped (equals the objective at
    /// proven optimality).
    double best_bound = 0.0;

    bool optimal() const { return status == Status::optimal; }
};

struct Tolerances {
    double feasibility = 1e-7;
    double integrality = 1e-7;
    double gap = 1e-9;
    /// Search also stops once the gap is within this fraction of the incumbent.
    double relative_gap = 0.0;
};

struct MilpOptions {
    long long node_limit = 200000;
    Tolerances tolerances;
};

/// Optimal basic solution of the continuous relaxation (integrality ignored).
/// Dense bounded-variable primal simplex, Dantzig pricing with Bland's rule
/// taking over during degenerate stalls.
Solution solve_lp(const LinearProgram& program, const Tolerances& tolerances = {});

/// Best-bound branch and bound over solve_lp.  Branches on the most
/// fractional variable of the highest priority class, lowest index on ties.
Solution solve_milp(const LinearProgram& program, const MilpOptions& options = {});

/// CPLEX LP text format with a stable layout.
void write_lp_format(const LinearProgram& program, std::ostream& out);
std::string to_lp_format(const LinearProgram& program);

}  // namespace aavr::milp
