#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/fit.hpp"
#include "sbmlab/radial/solvers.hpp"

namespace sbm {

struct RateFits {
    ExponentFit p;      // from d^lambda(x) in |x| at the largest lambda
    ExponentFit alpha;  // from d^lambda(x) in lambda at the largest |x|
};

// d^lambda(x) = V_inf(x) - V^lambda(x) on a radial grid.
inline std::vector<double> v_deficit(int d, double lambda, const std::vector<double>& xs) {
    const auto sol = solve_v_lambda(d, lambda, xs);
    std::vector<double> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(v_infinity(d, xs[i]) - sol.u[i]);
    return out;
}

inline RateFits fit_rate_exponents(int d, std::vector<double> lambdas, std::vector<double> xs) {
    check_dim(d);
    if (lambdas.size() < 4 || xs.size() < 4) throw input_error("fit_rate_exponents: need at least 4 grid points per axis");
    std::sort(lambdas.begin(), lambdas.end());
    std::sort(xs.begin(), xs.end());
    for (double l : lambdas)
        for (double x : xs)
            if (!(l * std::pow(x, 4 - d) >= 1)) throw domain_error("fit_rate_exponents: need lambda |x|^(4-d) >= 1");
    RateFits out;
    const auto dx = v_deficit(d, lambdas.back(), xs);
    out.p = loglog_fit(xs, dx, "p");
    out.p.estimate = -out.p.estimate;
    std::vector<double> dl;
    for (double l : lambdas) dl.push_back(v_deficit(d, l, {xs.back()}).front());
    out.alpha = loglog_fit(lambdas, dl, "alpha");
    out.alpha.estimate = -out.alpha.estimate;
    return out;
}

struct ConvRate {
    double rho = std::numeric_limits<double>::infinity();
    double rho_delta0 = std::numeric_limits<double>::infinity();  // bounded as delta0 -> 0 in every dimension
    // rho rescaled by its actual growth: sqrt(delta0) in d = 1,
    // sqrt(delta0 / log(1/delta0)) in d = 2 (critical wave), delta0 in d = 3.
    double natural = std::numeric_limits<double>::infinity();
    std::string diagnostic;
};

// Smallest rho with U^{delta0,1}(r) >= (1 - delta) V_inf(r) for all r >= rho.
inline ConvRate convrate_threshold(int d, double delta0, double delta, double r_max = 0) {
    check_dim(d);
    if (!(delta0 > 0) || !(delta > 0 && delta < 1)) throw domain_error("convrate_threshold: bad delta0 or delta");
    if (r_max <= 0) r_max = 1e4 * std::max(1.0, 1.0 / delta0);
    const std::size_t n = static_cast<std::size_t>(200 * std::log10(r_max)) + 2;
    const auto grid = log_grid(1.0, r_max, n);
    const auto sol = solve_u_exit(d, delta0, 1.0, grid);
    ConvRate out;
    auto ratio = [&](std::size_t i) { return sol.u[i] / v_infinity(d, sol.r[i]); };
    std::size_t i = grid.size();
    while (i > 0 && ratio(i - 1) >= 1 - delta) --i;
    if (i == grid.size()) {
        out.diagnostic = "threshold not reached within r_max";
        return out;
    }
    if (i == 0) {
        out.rho = 1.0;
    } else {
        // Refine between grid points on the log-interpolated ratio.
        double lo = grid[i - 1], hi = grid[i];
        for (int k = 0; k < 60; ++k) {
            const double mid = std::sqrt(lo * hi);
            (sol.at(mid) / v_infinity(d, mid) >= 1 - delta ? hi : lo) = mid;
        }
        out.rho = hi;
    }
    out.rho_delta0 = out.rho * delta0;
    if (d == 1) out.natural = out.rho * std::sqrt(delta0);
    else if (d == 2) out.natural = out.rho * std::sqrt(delta0 / std::log(1 / delta0));
    else out.natural = out.rho * delta0;
    return out;
}

// Lower-bound calibration: smallest s with V^1(s) s^2 >= 2(4-d) - eta. By
// scaling, V^lambda(x) >= (2(4-d) - eta)/|x|^2 for |x| >= s lambda^{-1/(4-d)}.
inline double calibrate_lower_bound_radius(int d, double eta) {
    check_dim(d);
    const auto grid = log_grid(1e-3, 1e4, 1401);
    const auto sol = solve_v_lambda(d, 1.0, grid);
    std::size_t i = grid.size();
    while (i > 0 && sol.u[i - 1] * grid[i - 1] * grid[i - 1] >= 2.0 * (4 - d) - eta) --i;
    if (i == grid.size()) throw convergence_error("calibrate_lower_bound_radius: bound never attained");
    return grid[i];
}

struct MonotoneCheck {
    bool monotone = true;        // |x|^p d^lambda(x) nondecreasing
    double worst_drop = 0;       // largest relative decrease seen
    double ratio_sup_inf = 0;    // sup / inf over the grid (upper-bound constant)
};

// |x|^p d^lambda(x) for |x| >= R: nondecreasing and bounded by a constant
// multiple of its value at R.
inline MonotoneCheck deficit_profile_check(int d, double lambda, const std::vector<double>& xs) {
    const auto ex = exponents(d);
    const auto dx = v_deficit(d, lambda, xs);
    MonotoneCheck m;
    double lo = std::numeric_limits<double>::infinity(), hi = 0, prev = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = std::pow(xs[i], ex.p) * dx[i];
        if (i && v < prev) {
            m.worst_drop = std::max(m.worst_drop, (prev - v) / prev);
            if ((prev - v) / prev > 1e-7) m.monotone = false;
        }
        prev = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    m.ratio_sup_inf = hi / lo;
    return m;
}

}  // namespace sbm
