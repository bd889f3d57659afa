#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/error.hpp"
#include "sbmlab/core/fit.hpp"
#include "sbmlab/radial/solvers.hpp"

namespace sbm {

struct TailPoint {
    double x = 0, a = 0;
    std::size_t n = 0, hits = 0;  // replicates, replicates with 0 < L <= a
    double prob = 0, se = 0;
};

struct TailFits {
    ExponentFit alpha;  // slope of log P(0 < L <= a) in log a at x_ref
    ExponentFit p;      // minus the slope in log |x| at a_ref
    bool has_alpha = false, has_p = false;
    std::vector<TailPoint> table;
    std::vector<std::string> warnings;

    CsvTable to_csv() const {
        CsvTable t({"x", "a", "n", "hits", "prob", "se"});
        for (const auto& r : table) t.row({fmt_num(r.x), fmt_num(r.a), fmt_num(r.n), fmt_num(r.hits), fmt_num(r.prob), fmt_num(r.se)});
        return t;
    }
};

inline TailPoint tail_point(const std::vector<double>& samples, double x, double a) {
    TailPoint t;
    t.x = x;
    t.a = a;
    t.n = samples.size();
    for (double v : samples)
        if (v > 0 && v <= a) ++t.hits;
    t.prob = t.n ? static_cast<double>(t.hits) / t.n : 0.0;
    t.se = t.n ? std::sqrt(t.prob * (1 - t.prob) / t.n) : 0.0;
    return t;
}

// samples[i] holds local-time samples at |x| = x_grid[i] over replicates.
// Grid points with no replicate in (0, a] are dropped with a warning.
inline TailFits tail_exponents(const std::vector<std::vector<double>>& samples, const std::vector<double>& a_grid,
                               const std::vector<double>& x_grid, std::size_t x_ref = 0, std::size_t a_ref = 0) {
    if (samples.size() != x_grid.size()) throw input_error("tail_exponents: one sample vector per x required");
    if (x_ref >= x_grid.size() || a_ref >= a_grid.size()) throw input_error("tail_exponents: reference index out of range");
    TailFits out;
    for (std::size_t i = 0; i < x_grid.size(); ++i)
        for (double a : a_grid) out.table.push_back(tail_point(samples[i], x_grid[i], a));
    auto at = [&](std::size_t i, std::size_t j) -> const TailPoint& { return out.table[i * a_grid.size() + j]; };
    std::vector<double> la, lp;
    for (std::size_t j = 0; j < a_grid.size(); ++j) {
        const auto& t = at(x_ref, j);
        if (t.hits == 0) {
            out.warnings.push_back("no replicate with 0<L<=" + fmt_num(t.a) + " at x=" + fmt_num(t.x) + "; point dropped");
            continue;
        }
        la.push_back(t.a);
        lp.push_back(t.prob);
    }
    if (la.size() >= 2) {
        out.alpha = loglog_fit(la, lp, "alpha");
        out.alpha.method = "tail-regression";
        out.has_alpha = true;
    }
    std::vector<double> lx, lq;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const auto& t = at(i, a_ref);
        if (t.hits == 0) {
            out.warnings.push_back("no replicate with 0<L<=" + fmt_num(t.a) + " at x=" + fmt_num(t.x) + "; point dropped");
            continue;
        }
        lx.push_back(t.x);
        lq.push_back(t.prob);
    }
    if (lx.size() >= 2) {
        out.p = loglog_fit(lx, lq, "p");
        out.p.estimate = -out.p.estimate;
        out.p.method = "tail-regression";
        out.has_p = true;
    }
    return out;
}

// Local slope, at lambda = 1/a, of log(E[exp(-lambda L^x)] - P(L^x = 0))
// against log(1/lambda), computed from the radial solutions.  By the
// Tauberian correspondence this is the slope that P(0 < L^x <= a) follows
// around a; it tends to alpha as a -> 0.
inline double laplace_local_slope(int d, double x, double a, double rel_step = 0.05) {
    const double vinf = v_infinity(d, x);
    auto g = [&](double lam) {
        const double v = d == 1 ? v_lambda_exact_d1(lam, x) : solve_v_lambda(d, lam, {x}).u[0];
        return std::log(std::exp(-v) - std::exp(-vinf));
    };
    const double lam = 1.0 / a;
    const double f = std::exp(rel_step);
    return -(g(lam * f) - g(lam / f)) / (2 * rel_step);
}

}  // namespace sbm
