#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/error.hpp"

namespace sbm {

enum class SolutionKind { v_lambda, u_exit, u_exit_infinite };

inline std::string to_string(SolutionKind k) {
    switch (k) {
        case SolutionKind::v_lambda: return "v_lambda";
        case SolutionKind::u_exit: return "u_exit";
        case SolutionKind::u_exit_infinite: return "u_exit_infinite";
    }
    return "?";
}

inline SolutionKind solution_kind_from(const std::string& s) {
    if (s == "v_lambda") return SolutionKind::v_lambda;
    if (s == "u_exit") return SolutionKind::u_exit;
    if (s == "u_exit_infinite") return SolutionKind::u_exit_infinite;
    throw input_error("unknown solution kind '" + s + "'");
}

struct RadialSolution {
    SolutionKind kind = SolutionKind::v_lambda;
    int d = 3;
    double lambda = 0;   // +inf for the infinite exit problem
    double epsilon = 0;  // 0 for v_lambda
    std::vector<double> r, u, du;

    // Diagnostics from the solve.
    double far_coeff = 0;       // A in u ~ V_inf - A r^{-p}
    double flux = 0;            // recovered source strength (v_lambda)
    double r_inner = 0;         // innermost radius reached
    double collar = 0;          // collar width used (infinite exit)
    int shooting_evals = 0;

    double at(double x) const;
};

// Log-linear interpolation in r; log u is smooth in log r for all kinds.
inline double RadialSolution::at(double x) const {
    if (r.empty()) throw input_error("empty radial solution");
    if (x < r.front() * (1 - 1e-12) || x > r.back() * (1 + 1e-12))
        throw domain_error("radial solution queried outside its grid");
    std::size_t hi = 1;
    while (hi < r.size() - 1 && r[hi] < x) ++hi;
    const std::size_t lo = hi - 1;
    if (r.size() == 1) return u[0];
    const double t = (std::log(x) - std::log(r[lo])) / (std::log(r[hi]) - std::log(r[lo]));
    if (u[lo] > 0 && u[hi] > 0) return std::exp((1 - t) * std::log(u[lo]) + t * std::log(u[hi]));
    return (1 - t) * u[lo] + t * u[hi];
}

inline CsvTable to_csv(const RadialSolution& s) {
    CsvTable t({"r", "u"});
    t.add_meta("kind", to_string(s.kind));
    t.add_meta("d", std::to_string(s.d));
    t.add_meta("lambda", fmt_num(s.lambda));
    t.add_meta("epsilon", fmt_num(s.epsilon));
    for (std::size_t i = 0; i < s.r.size(); ++i) t.row({fmt_num(s.r[i]), fmt_num(s.u[i])});
    return t;
}

inline RadialSolution radial_from_csv(const CsvTable& t) {
    if (t.header() != std::vector<std::string>{"r", "u"}) throw input_error("radial csv: expected columns r,u");
    RadialSolution s;
    bool have[4] = {false, false, false, false};
    for (const auto& m : t.meta()) {
        const auto eq = m.find('=');
        const std::string k = m.substr(0, eq), v = eq == std::string::npos ? "" : m.substr(eq + 1);
        try {
            if (k == "kind") s.kind = solution_kind_from(v), have[0] = true;
            else if (k == "d") s.d = std::stoi(v), have[1] = true;
            else if (k == "lambda") s.lambda = std::stod(v), have[2] = true;
            else if (k == "epsilon") s.epsilon = std::stod(v), have[3] = true;
        } catch (const std::logic_error&) {
            throw input_error("radial csv: bad value for " + k);
        }
    }
    for (bool h : have)
        if (!h) throw input_error("radial csv: missing header field");
    for (const auto& row : t.rows()) {
        try {
            s.r.push_back(std::stod(row[0]));
            s.u.push_back(std::stod(row[1]));
        } catch (const std::logic_error&) {
            throw input_error("radial csv: non-numeric row");
        }
    }
    return s;
}

}  // namespace sbm
