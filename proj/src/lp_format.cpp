#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "aavr/milp.hpp"

namespace aavr::milp {

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string var_name(const LinearProgram& p, std::size_t v) {
    std::string raw = p.variables[v].name.empty() ? "x" + std::to_string(v) : p.variables[v].name;
    std::string out;
    for (char c : raw) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') out.insert(0, "v");
    // Suffix with the index so sanitised names never collide.
    return out + "_" + std::to_string(v);
}

void write_linear(std::ostream& out, const LinearProgram& p, const std::vector<Term>& terms) {
    bool first = true;
    for (const auto& t : terms) {
        if (t.coef == 0.0) continue;
        const double a = std::abs(t.coef);
        out << (t.coef < 0.0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        out << number(a) << ' ' << var_name(p, static_cast<std::size_t>(t.var));
        first = false;
    }
    if (first) out << "0";
}

}  // namespace

void write_lp_format(const LinearProgram& program, std::ostream& out) {
    out << "\\ written by aavr\n";
    out << (program.sense == Sense::maximize ? "Maximize\n" : "Minimize\n");
    std::vector<Term> objective;
    for (std::size_t v = 0; v < program.n_vars(); ++v) {
        if (program.variables[v].objective != 0.0) {
            objective.push_back({static_cast<int>(v), program.variables[v].objective});
        }
    }
    out << " obj: ";
    write_linear(out, program, objective);
    if (program.objective_constant != 0.0) {
        out << (program.objective_constant < 0.0 ? " - " : " + ") << number(std::abs(program.objective_constant));
    }
    out << "\nSubject To\n";
    for (std::size_t r = 0; r < program.n_rows(); ++r) {
        const auto& row = program.constraints[r];
        out << " c" << r << ": ";
        write_linear(out, program, row.terms);
        switch (row.relation) {
            case Relation::less_equal: out << " <= "; break;
            case Relation::greater_equal: out << " >= "; break;
            case Relation::equal: out << " = "; break;
        }
        out << number(row.rhs) << '\n';
    }
    out << "Bounds\n";
    for (std::size_t v = 0; v < program.n_vars(); ++v) {
        const auto& var = program.variables[v];
        if (var.type == VarType::binary && var.lo <= 0.0 && var.hi >= 1.0) continue;
        const std::string name = var_name(program, v);
        if (std::isinf(var.lo) && std::isinf(var.hi)) {
            out << ' ' << name << " free\n";
        } else {
            out << ' ' << (std::isinf(var.lo) ? "-inf" : number(var.lo)) << " <= " << name << " <= "
                << (std::isinf(var.hi) ? "+inf" : number(var.hi)) << '\n';
        }
    }
    bool any_general = false, any_binary = false;
    for (const auto& var : program.variables) {
        any_general |= var.type == VarType::integer;
        any_binary |= var.type == VarType::binary;
    }
    if (any_general) {
        out << "General\n";
        for (std::size_t v = 0; v < program.n_vars(); ++v) {
            if (program.variables[v].type == VarType::integer) out << ' ' << var_name(program, v) << '\n';
        }
    }
    if (any_binary) {
        out << "Binary\n";
        for (std::size_t v = 0; v < program.n_vars(); ++v) {
            if (program.variables[v].type == VarType::binary) out << ' ' << var_name(program, v) << '\n';
        }
    }
    out << "End\n";
}

std::string to_lp_format(const LinearProgram& program) {
    std::ostringstream out;
    write_lp_format(program, out);
    return out.str();
}

}  // namespace aavr::milp
