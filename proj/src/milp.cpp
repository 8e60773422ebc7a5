#include "aavr/milp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "aavr/core.hpp"

namespace aavr::milp {

int LinearProgram::add_variable(std::string name, double lo, double hi, VarType type, double objective) {
    if (type == VarType::binary) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
    }
    variables.push_back({std::move(name), lo, hi, type, objective, 0});
    return static_cast<int>(variables.size() - 1);
}

int LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs) {
    constraints.push_back({std::move(name), std::move(terms), relation, rhs});
    return static_cast<int>(constraints.size() - 1);
}

void LinearProgram::validate() const {
    for (std::size_t v = 0; v < variables.size(); ++v) {
        const auto& var = variables[v];
        if (std::isnan(var.lo) || std::isnan(var.hi) || var.lo > var.hi) {
            throw InputError("variable " + std::to_string(v) + " has empty or invalid bounds");
        }
        if (!std::isfinite(var.objective)) {
            throw InputError("variable " + std::to_string(v) + " has a non-finite objective coefficient");
        }
    }
    for (std::size_t r = 0; r < constraints.size(); ++r) {
        const auto& row = constraints[r];
        if (!std::isfinite(row.rhs)) throw InputError("constraint " + std::to_string(r) + " has a non-finite rhs");
        for (const auto& t : row.terms) {
            if (t.var < 0 || static_cast<std::size_t>(t.var) >= variables.size()) {
                throw InputError("constraint " + std::to_string(r) + " references an unknown variable");
            }
            if (!std::isfinite(t.coef)) {
                throw InputError("constraint " + std::to_string(r) + " has a non-finite coefficient");
            }
        }
    }
}

double LinearProgram::evaluate(const std::vector<double>& values) const {
    double total = objective_constant;
    for (std::size_t v = 0; v < variables.size(); ++v) total += variables[v].objective * values[v];
    return total;
}

double LinearProgram::row_activity(const Constraint& row, const std::vector<double>& values) const {
    double total = 0.0;
    for (const auto& t : row.terms) total += t.coef * values[static_cast<std::size_t>(t.var)];
    return total;
}

double LinearProgram::max_violation(const std::vector<double>& values, bool check_integrality) const {
    if (values.size() != variables.size()) return kInfinity;
    double worst = 0.0;
    for (std::size_t v = 0; v < variables.size(); ++v) {
        const auto& var = variables[v];
        worst = std::max({worst, var.lo - values[v], values[v] - var.hi});
        if (check_integrality && var.integral()) {
            worst = std::max(worst, std::abs(values[v] - std::round(values[v])));
        }
    }
    for (const auto& row : constraints) {
        const double a = row_activity(row, values);
        switch (row.relation) {
            case Relation::less_equal: worst = std::max(worst, a - row.rhs); break;
            case Relation::greater_equal: worst = std::max(worst, row.rhs - a); break;
            case Relation::equal: worst = std::max(worst, std::abs(a - row.rhs)); break;
        }
    }
    return worst;
}

const char* to_string(Status status) {
    switch (status) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::node_limit: return "node_limit";
    }
    return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kDropTol = 1e-13;
constexpr int kDegenerateStreakForBland = 50;

enum class ColState : unsigned char { basic, lower, upper };

/// How an original variable maps onto the nonnegative simplex columns.
struct ColumnMap {
    enum class Kind { fixed, shifted, mirrored, split } kind = Kind::fixed;
    double offset = 0.0;
    int col = -1;
    int col2 = -1;
};

/// Dense tableau simplex over  max c.y  s.t.  A y + slack = b,  0 <= y <= u.
class Simplex {
public:
    Simplex(const LinearProgram& program, const std::vector<double>& lo, const std::vector<double>& hi,
            double feas_tol)
        : program_(program), feas_tol_(feas_tol) {
        build(lo, hi);
    }

    Status run() {
        if (trivially_infeasible_) return Status::infeasible;
        if (n_art_ > 0) {
            set_phase_one_costs();
            const Status s = iterate();
            if (s != Status::optimal) return Status::infeasible;  // phase one is bounded
            recompute_basic_values();
            double infeasibility = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (is_artificial(basis_[i])) infeasibility += std::abs(xb_[i]);
            }
            if (infeasibility > 1e-8 * (1.0 + rhs_scale_)) return Status::infeasible;
            drive_out_artificials();
        }
        set_phase_two_costs();
        const Status s = iterate();
        if (s == Status::unbounded) return s;
        recompute_basic_values();
        return Status::optimal;
    }

    std::vector<double> primal() const {
        std::vector<double> y(n_cols_, 0.0);
        for (std::size_t j = 0; j < n_cols_; ++j) {
            if (state_[j] == ColState::upper) y[j] = ub_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) y[static_cast<std::size_t>(basis_[i])] = std::max(0.0, xb_[i]);
        std::vector<double> x(maps_.size());
        for (std::size_t v = 0; v < maps_.size(); ++v) {
            const auto& mp = maps_[v];
            switch (mp.kind) {
                case ColumnMap::Kind::fixed: x[v] = mp.offset; break;
                case ColumnMap::Kind::shifted: x[v] = mp.offset + y[static_cast<std::size_t>(mp.col)]; break;
                case ColumnMap::Kind::mirrored: x[v] = mp.offset - y[static_cast<std::size_t>(mp.col)]; break;
                case ColumnMap::Kind::split:
                    x[v] = y[static_cast<std::size_t>(mp.col)] - y[static_cast<std::size_t>(mp.col2)];
                    break;
            }
        }
        return x;
    }

    long long iterations() const { return iterations_; }

private:
    double& at(std::size_t i, std::size_t j) { return tab_[i * n_cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return tab_[i * n_cols_ + j]; }
    bool is_artificial(int col) const { return static_cast<std::size_t>(col) >= art_begin_; }

    void build(const std::vector<double>& lo, const std::vector<double>& hi) {
        const double sign = program_.sense == Sense::maximize ? 1.0 : -1.0;
        const std::size_t n = program_.n_vars();
        maps_.resize(n);
        std::vector<double> struct_ub, struct_cost;
        for (std::size_t v = 0; v < n; ++v) {
            const double l = lo[v], h = hi[v];
            const double c = sign * program_.variables[v].objective;
            auto& mp = maps_[v];
            if (l > h + feas_tol_) {
                trivially_infeasible_ = true;
                mp = {ColumnMap::Kind::fixed, l, -1, -1};
            } else if (h - l <= 0.0) {
                mp = {ColumnMap::Kind::fixed, l, -1, -1};
            } else if (std::isfinite(l)) {
                mp = {ColumnMap::Kind::shifted, l, static_cast<int>(struct_ub.size()), -1};
                struct_ub.push_back(h - l);
                struct_cost.push_back(c);
            } else if (std::isfinite(h)) {
                mp = {ColumnMap::Kind::mirrored, h, static_cast<int>(struct_ub.size()), -1};
                struct_ub.push_back(kInfinity);
                struct_cost.push_back(-c);
            } else {
                mp = {ColumnMap::Kind::split, 0.0, static_cast<int>(struct_ub.size()),
                      static_cast<int>(struct_ub.size() + 1)};
                struct_ub.push_back(kInfinity);
                struct_ub.push_back(kInfinity);
                struct_cost.push_back(c);
                struct_cost.push_back(-c);
            }
        }
        const std::size_t n_struct = struct_ub.size();

        // Rows in y-space, normalised to a nonnegative right-hand side.
        struct Row {
            std::vector<std::pair<std::size_t, double>> coefs;
            double rhs = 0.0;
            int slack_sign = 0;  // +1, -1 or 0 for equality
        };
        std::vector<Row> rows;
        std::vector<double> scratch(n_struct, 0.0);
        std::vector<char> seen(n_struct, 0);
        std::vector<std::size_t> touched;
        for (const auto& con : program_.constraints) {
            double shift = 0.0;
            touched.clear();
            auto add = [&](int col, double coef) {
                auto c = static_cast<std::size_t>(col);
                if (!seen[c]) {
                    seen[c] = 1;
                    touched.push_back(c);
                }
                scratch[c] += coef;
            };
            for (const auto& t : con.terms) {
                if (t.coef == 0.0) continue;
                const auto& mp = maps_[static_cast<std::size_t>(t.var)];
                switch (mp.kind) {
                    case ColumnMap::Kind::fixed: shift += t.coef * mp.offset; break;
                    case ColumnMap::Kind::shifted:
                        shift += t.coef * mp.offset;
                        add(mp.col, t.coef);
                        break;
                    case ColumnMap::Kind::mirrored:
                        shift += t.coef * mp.offset;
                        add(mp.col, -t.coef);
                        break;
                    case ColumnMap::Kind::split:
                        add(mp.col, t.coef);
                        add(mp.col2, -t.coef);
                        break;
                }
            }
            Row row;
            row.rhs = con.rhs - shift;
            std::sort(touched.begin(), touched.end());
            for (auto c : touched) {
                if (scratch[c] != 0.0) row.coefs.emplace_back(c, scratch[c]);
                scratch[c] = 0.0;
                seen[c] = 0;
            }
            row.slack_sign = con.relation == Relation::less_equal      ? 1
                             : con.relation == Relation::greater_equal ? -1
                                                                       : 0;
            if (row.coefs.empty()) {
                const bool ok = (row.slack_sign == 1 && row.rhs >= -feas_tol_) ||
                                (row.slack_sign == -1 && row.rhs <= feas_tol_) ||
                                (row.slack_sign == 0 && std::abs(row.rhs) <= feas_tol_);
                if (!ok) trivially_infeasible_ = true;
                continue;
            }
            if (row.rhs < 0.0) {
                row.rhs = -row.rhs;
                for (auto& [c, a] : row.coefs) a = -a;
                row.slack_sign = -row.slack_sign;
            }
            rows.push_back(std::move(row));
        }

        m_ = rows.size();
        std::size_t n_slack = 0;
        for (const auto& r : rows) {
            if (r.slack_sign != 0) ++n_slack;
            if (r.slack_sign != 1) ++n_art_;
        }
        slack_begin_ = n_struct;
        art_begin_ = n_struct + n_slack;
        n_cols_ = art_begin_ + n_art_;

        tab_.assign(m_ * n_cols_, 0.0);
        ub_.assign(n_cols_, kInfinity);
        cost_.assign(n_cols_, 0.0);
        for (std::size_t j = 0; j < n_struct; ++j) {
            ub_[j] = struct_ub[j];
            cost_[j] = struct_cost[j];
        }
        state_.assign(n_cols_, ColState::lower);
        basis_.assign(m_, -1);
        xb_.assign(m_, 0.0);
        b_.assign(m_, 0.0);
        init_col_.assign(m_, 0);
        a_cols_.assign(n_cols_, {});

        std::size_t next_slack = slack_begin_, next_art = art_begin_;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& r = rows[i];
            for (const auto& [c, a] : r.coefs) {
                at(i, c) = a;
                a_cols_[c].emplace_back(i, a);
            }
            b_[i] = r.rhs;
            rhs_scale_ = std::max(rhs_scale_, r.rhs);
            if (r.slack_sign != 0) {
                const std::size_t s = next_slack++;
                at(i, s) = r.slack_sign;
                a_cols_[s].emplace_back(i, static_cast<double>(r.slack_sign));
                if (r.slack_sign == 1) {
                    basis_[i] = static_cast<int>(s);
                    init_col_[i] = s;
                }
            }
            if (r.slack_sign != 1) {
                const std::size_t a = next_art++;
                at(i, a) = 1.0;
                a_cols_[a].emplace_back(i, 1.0);
                basis_[i] = static_cast<int>(a);
                init_col_[i] = a;
            }
            xb_[i] = r.rhs;
        }
        for (std::size_t i = 0; i < m_; ++i) state_[static_cast<std::size_t>(basis_[i])] = ColState::basic;
    }

    void set_phase_one_costs() {
        phase_cost_.assign(n_cols_, 0.0);
        for (std::size_t j = art_begin_; j < n_cols_; ++j) phase_cost_[j] = -1.0;
        compute_reduced_costs();
    }

    void set_phase_two_costs() {
        phase_cost_ = cost_;
        for (std::size_t j = art_begin_; j < n_cols_; ++j) {
            phase_cost_[j] = 0.0;
            ub_[j] = 0.0;
        }
        compute_reduced_costs();
    }

    void compute_reduced_costs() {
        d_ = phase_cost_;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = phase_cost_[static_cast<std::size_t>(basis_[i])];
            if (cb == 0.0) continue;
            const double* row = &tab_[i * n_cols_];
            for (std::size_t j = 0; j < n_cols_; ++j) d_[j] -= cb * row[j];
        }
        for (std::size_t i = 0; i < m_; ++i) d_[static_cast<std::size_t>(basis_[i])] = 0.0;
    }

    /// x_B = B^-1 (b - sum of at-upper columns), with B^-1 read from the
    /// columns of the initial identity basis.
    void recompute_basic_values() {
        std::vector<double> rhs = b_;
        for (std::size_t j = 0; j < n_cols_; ++j) {
            if (state_[j] != ColState::upper) continue;
            for (const auto& [i, a] : a_cols_[j]) rhs[i] -= a * ub_[j];
        }
        for (std::size_t r = 0; r < m_; ++r) {
            double v = 0.0;
            for (std::size_t i = 0; i < m_; ++i) v += at(r, init_col_[i]) * rhs[i];
            xb_[r] = v;
        }
    }

    /// `column`, when given, holds the entering column before the pivot.
    void pivot(std::size_t r, std::size_t q, const std::vector<double>* column = nullptr) {
        double* prow = &tab_[r * n_cols_];
        const double piv = prow[q];
        nz_.clear();
        for (std::size_t j = 0; j < n_cols_; ++j) {
            if (prow[j] != 0.0) {
                prow[j] /= piv;
                if (std::abs(prow[j]) < kDropTol) {
                    prow[j] = 0.0;
                } else {
                    nz_.push_back(j);
                }
            }
        }
        prow[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            if (column && (*column)[i] == 0.0) continue;
            double* row = &tab_[i * n_cols_];
            const double a = row[q];
            if (a == 0.0) continue;
            for (std::size_t j : nz_) {
                double v = row[j] - a * prow[j];
                row[j] = std::abs(v) < kDropTol ? 0.0 : v;
            }
            row[q] = 0.0;
        }
        const double dq = d_[q];
        if (dq != 0.0) {
            for (std::size_t j : nz_) d_[j] -= dq * prow[j];
        }
        d_[q] = 0.0;
        state_[static_cast<std::size_t>(basis_[r])] = ColState::lower;  // caller fixes lower/upper
        basis_[r] = static_cast<int>(q);
        state_[q] = ColState::basic;
    }

    void drive_out_artificials() {
        for (std::size_t r = 0; r < m_; ++r) {
            if (!is_artificial(basis_[r])) continue;
            std::size_t best = n_cols_;
            double best_abs = 1e-7;
            for (std::size_t j = 0; j < art_begin_; ++j) {
                if (state_[j] == ColState::basic) continue;
                const double a = std::abs(at(r, j));
                if (a > best_abs) {
                    best_abs = a;
                    best = j;
                }
            }
            if (best == n_cols_) {
                // Redundant row: the artificial stays basic at zero.
                for (std::size_t j = 0; j < art_begin_; ++j) at(r, j) = 0.0;
                continue;
            }
            const auto leaving = static_cast<std::size_t>(basis_[r]);
            pivot(r, best);
            state_[leaving] = ColState::lower;
        }
        recompute_basic_values();
    }

    Status iterate() {
        const long long max_iter = 200LL * static_cast<long long>(m_ + n_cols_) + 10000;
        int degenerate_streak = 0;
        const std::size_t enter_limit = art_begin_;
        for (long long it = 0; it < max_iter; ++it) {
            const bool bland = degenerate_streak >= kDegenerateStreakForBland;

            // Pricing.
            std::size_t q = n_cols_;
            double best_score = 0.0;
            for (std::size_t j = 0; j < enter_limit; ++j) {
                const ColState s = state_[j];
                if (s == ColState::basic) continue;
                double score = 0.0;
                if (s == ColState::lower && d_[j] > kOptTol) {
                    score = d_[j];
                } else if (s == ColState::upper && d_[j] < -kOptTol) {
                    score = -d_[j];
                } else {
                    continue;
                }
                if (bland) {
                    q = j;
                    break;
                }
                if (score > best_score) {
                    best_score = score;
                    q = j;
                }
            }
            if (q == n_cols_) return Status::optimal;

            const double dir = state_[q] == ColState::lower ? 1.0 : -1.0;
            col_.resize(m_);
            for (std::size_t i = 0; i < m_; ++i) col_[i] = at(i, q);

            // Ratio test.
            double theta = kInfinity;
            std::size_t leave = m_;
            bool leave_to_upper = false;
            double leave_alpha = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double alpha = dir * col_[i];
                if (std::abs(alpha) <= kPivotTol) continue;
                const auto bcol = static_cast<std::size_t>(basis_[i]);
                double t;
                bool to_upper;
                if (alpha > 0.0) {
                    t = std::max(0.0, xb_[i]) / alpha;
                    to_upper = false;
                } else {
                    if (!std::isfinite(ub_[bcol])) continue;
                    t = std::max(0.0, ub_[bcol] - xb_[i]) / (-alpha);
                    to_upper = true;
                }
                bool take = false;
                if (t < theta - 1e-12) {
                    take = true;
                } else if (t <= theta + 1e-12 && leave < m_) {
                    if (bland) {
                        take = bcol < static_cast<std::size_t>(basis_[leave]);
                    } else {
                        take = std::abs(alpha) > std::abs(leave_alpha);
                    }
                }
                if (take) {
                    theta = std::min(theta, t);
                    leave = i;
                    leave_to_upper = to_upper;
                    leave_alpha = alpha;
                }
            }

            const double flip = ub_[q];
            if (flip <= theta) {
                if (!std::isfinite(flip)) return Status::unbounded;
                // Bound flip: entering variable crosses to its other bound.
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = col_[i];
                    if (a != 0.0) xb_[i] -= dir * flip * a;
                }
                state_[q] = state_[q] == ColState::lower ? ColState::upper : ColState::lower;
                degenerate_streak = flip > 1e-12 ? 0 : degenerate_streak + 1;
                ++iterations_;
                continue;
            }
            if (leave == m_) return Status::unbounded;

            for (std::size_t i = 0; i < m_; ++i) {
                const double a = col_[i];
                if (a != 0.0) xb_[i] -= dir * theta * a;
            }
            const double entering_value = state_[q] == ColState::lower ? theta : ub_[q] - theta;
            const auto leaving = static_cast<std::size_t>(basis_[leave]);
            pivot(leave, q, &col_);
            state_[leaving] = leave_to_upper ? ColState::upper : ColState::lower;
            xb_[leave] = entering_value;
            degenerate_streak = theta > 1e-12 ? 0 : degenerate_streak + 1;
            ++iterations_;
        }
        throw std::runtime_error("simplex iteration limit reached");
    }

    const LinearProgram& program_;
    double feas_tol_;
    bool trivially_infeasible_ = false;
    std::vector<ColumnMap> maps_;

    std::size_t m_ = 0;
    std::size_t n_cols_ = 0;
    std::size_t n_art_ = 0;
    std::size_t slack_begin_ = 0;
    std::size_t art_begin_ = 0;
    double rhs_scale_ = 0.0;

    std::vector<double> tab_;
    std::vector<double> ub_;
    std::vector<double> cost_;
    std::vector<double> phase_cost_;
    std::vector<double> d_;
    std::vector<ColState> state_;
    std::vector<int> basis_;
    std::vector<double> xb_;
    std::vector<double> b_;
    std::vector<std::size_t> init_col_;
    std::vector<std::vector<std::pair<std::size_t, double>>> a_cols_;
    std::vector<std::size_t> nz_;
    std::vector<double> col_;
    long long iterations_ = 0;
};

struct LpResult {
    Status status = Status::infeasible;
    std::vector<double> values;
    double objective = 0.0;
    long long iterations = 0;
};

LpResult solve_bounded(const LinearProgram& program, const std::vector<double>& lo,
                       const std::vector<double>& hi, const Tolerances& tol) {
    Simplex simplex(program, lo, hi, tol.feasibility);
    LpResult res;
    res.status = simplex.run();
    res.iterations = simplex.iterations();
    if (res.status == Status::optimal) {
        res.values = simplex.primal();
        // Clip tiny bound overshoots from floating point noise.
        for (std::size_t v = 0; v < res.values.size(); ++v) {
            res.values[v] = std::clamp(res.values[v], lo[v], hi[v]);
        }
        res.objective = program.evaluate(res.values);
    }
    return res;
}

void bounds_of(const LinearProgram& program, std::vector<double>& lo, std::vector<double>& hi,
               bool integral_rounding, double int_tol) {
    const std::size_t n = program.n_vars();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& var = program.variables[v];
        lo[v] = var.lo;
        hi[v] = var.hi;
        if (integral_rounding && var.integral()) {
            if (std::isfinite(lo[v])) lo[v] = std::ceil(lo[v] - int_tol);
            if (std::isfinite(hi[v])) hi[v] = std::floor(hi[v] + int_tol);
        }
    }
}

void certify(const LinearProgram& program, const std::vector<double>& values, bool integral,
             const Tolerances& tol) {
    const double violation = program.max_violation(values, integral);
    if (violation > tol.feasibility) {
        throw std::runtime_error("solver produced a point violating the program by " +
                                 std::to_string(violation));
    }
}

}  // namespace

Solution solve_lp(const LinearProgram& program, const Tolerances& tolerances) {
    program.validate();
    std::vector<double> lo, hi;
    bounds_of(program, lo, hi, false, tolerances.integrality);
    const LpResult res = solve_bounded(program, lo, hi, tolerances);
    Solution sol;
    sol.status = res.status;
    sol.nodes = 1;
    sol.simplex_iterations = res.iterations;
    if (res.status == Status::optimal) {
        certify(program, res.values, false, tolerances);
        sol.values = res.values;
        sol.objective_value = res.objective;
        sol.best_bound = res.objective;
    }
    return sol;
}

namespace {

struct Node {
    double bound = 0.0;  // in maximisation terms
    double key = 0.0;    // bound snapped to the gap tolerance, for ordering
    int depth = 0;
    long long id = 0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> values;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.key != b.key) return a.key < b.key;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id > b.id;
    }
};

}  // namespace

Solution solve_milp(const LinearProgram& program, const MilpOptions& options) {
    program.validate();
    const auto& tol = options.tolerances;
    const double sign = program.sense == Sense::maximize ? 1.0 : -1.0;
    const std::size_t n = program.n_vars();

    std::vector<double> root_lo, root_hi;
    bounds_of(program, root_lo, root_hi, true, tol.integrality);

    Solution sol;
    bool have_incumbent = false;
    double incumbent = -kInfinity;  // maximisation terms
    std::vector<double> incumbent_values;

    auto fractional_var = [&](const std::vector<double>& x) -> int {
        int best = -1;
        int best_priority = 0;
        double best_frac = -1.0;
        for (std::size_t v = 0; v < n; ++v) {
            const auto& var = program.variables[v];
            if (!var.integral()) continue;
            const double f = x[v] - std::floor(x[v]);
            const double dist = std::min(f, 1.0 - f);
            if (dist <= tol.integrality) continue;
            if (best < 0 || var.branch_priority > best_priority ||
                (var.branch_priority == best_priority && dist > best_frac + 1e-12)) {
                best = static_cast<int>(v);
                best_priority = var.branch_priority;
                best_frac = dist;
            }
        }
        return best;
    };

    // Fix integers at their rounded values and re-solve for consistent
    // continuous values.
    auto accept_integral = [&](const std::vector<double>& x) {
        std::vector<double> lo(root_lo), hi(root_hi);
        for (std::size_t v = 0; v < n; ++v) {
            if (program.variables[v].integral()) lo[v] = hi[v] = std::round(x[v]);
        }
        LpResult polished = solve_bounded(program, lo, hi, tol);
        sol.simplex_iterations += polished.iterations;
        std::vector<double> values;
        if (polished.status == Status::optimal) {
            values = std::move(polished.values);
        } else {
            values = x;
            for (std::size_t v = 0; v < n; ++v) {
                if (program.variables[v].integral()) values[v] = std::round(values[v]);
            }
        }
        if (program.max_violation(values, true) > tol.feasibility) return;
        const double obj = sign * program.evaluate(values);
        if (!have_incumbent || obj > incumbent + tol.gap) {
            have_incumbent = true;
            incumbent = obj;
            incumbent_values = std::move(values);
        }
    };

    auto allowed_gap = [&] { return std::max(tol.gap, tol.relative_gap * std::abs(incumbent)); };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long long next_id = 0;
    bool unbounded = false;

    auto evaluate = [&](std::vector<double> lo, std::vector<double> hi, int depth) {
        ++sol.nodes;
        LpResult res = solve_bounded(program, lo, hi, tol);
        sol.simplex_iterations += res.iterations;
        if (res.status == Status::unbounded) {
            unbounded = true;
            return;
        }
        if (res.status != Status::optimal) return;
        const double bound = sign * res.objective;
        if (have_incumbent && bound <= incumbent + allowed_gap()) return;
        if (fractional_var(res.values) < 0) {
            accept_integral(res.values);
            return;
        }
        // Rounding heuristic near the root and periodically below it.
        if (depth < 8 || sol.nodes % 32 == 0) {
            accept_integral(res.values);
            if (bound <= incumbent + allowed_gap()) return;
        }
        const double key = std::round(bound / std::max(tol.gap, 1e-12));
        open.push(Node{bound, key, depth, next_id++, std::move(lo), std::move(hi), std::move(res.values)});
    };

    evaluate(root_lo, root_hi, 0);
    if (unbounded) {
        sol.status = Status::unbounded;
        return sol;
    }

    bool limit_hit = false;
    while (!open.empty()) {
        if (have_incumbent && open.top().bound <= incumbent + allowed_gap()) break;
        if (sol.nodes >= options.node_limit) {
            limit_hit = true;
            break;
        }
        Node node = open.top();
        open.pop();
        const int v = fractional_var(node.values);
        const double value = node.values[static_cast<std::size_t>(v)];
        // The child nearer the relaxed value is evaluated first and so wins
        // equal-bound ties.
        auto down = [&] {
            std::vector<double> hi(node.hi);
            hi[static_cast<std::size_t>(v)] = std::floor(value);
            evaluate(node.lo, std::move(hi), node.depth + 1);
        };
        auto up = [&] {
            std::vector<double> lo(node.lo);
            lo[static_cast<std::size_t>(v)] = std::ceil(value);
            evaluate(std::move(lo), node.hi, node.depth + 1);
        };
        if (value - std::floor(value) < 0.5) {
            down();
            up();
        } else {
            up();
            down();
        }
        if (unbounded) {
            sol.status = Status::unbounded;
            return sol;
        }
    }

    if (limit_hit) {
        sol.status = Status::node_limit;
        sol.best_bound = sign * open.top().bound;
    } else {
        sol.status = have_incumbent ? Status::optimal : Status::infeasible;
        sol.best_bound = have_incumbent ? sign * incumbent : 0.0;
    }
    if (have_incumbent) {
        certify(program, incumbent_values, true, tol);
        sol.values = std::move(incumbent_values);
        sol.objective_value = program.evaluate(sol.values);
    }
    return sol;
}

}  // namespace aavr::milp
