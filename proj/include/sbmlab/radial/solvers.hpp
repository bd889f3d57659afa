#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/roots.hpp"
#include "sbmlab/radial/exponents.hpp"
#include "sbmlab/radial/radial_solution.hpp"
#include "sbmlab/radial/shooting.hpp"

namespace sbm {

inline std::vector<double> log_grid(double r_min, double r_max, std::size_t n) {
    if (!(r_min > 0) || !(r_max > r_min) || n < 2) throw domain_error("log_grid: need 0 < r_min < r_max, n >= 2");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(std::log(r_min) + (std::log(r_max) - std::log(r_min)) * i / (n - 1.0));
    g.front() = r_min;
    g.back() = r_max;
    return g;
}

inline void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw domain_error("empty radial grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0) || !std::isfinite(grid[i])) throw domain_error("radial grid must be positive and finite");
        if (i && !(grid[i] > grid[i - 1])) throw domain_error("radial grid must be strictly increasing");
    }
}

namespace detail {

// Flux -1/2 |dB_r| u'(r) at a small radius, plus the mass of u^2 inside
// B_r from the leading behaviour of u there.
inline double source_flux(int d, double r, const Vec<2>& y) {
    const double S = sphere_area(d);
    const double u = y[0], z = y[1];
    double inner = 0;
    if (d == 1) inner = r * u * u;
    else if (d == 2) inner = r * r * u * u / 2;
    else inner = r * r * r * u * u;
    return 0.5 * S * (-std::pow(r, d - 2) * z + inner);
}

inline std::vector<double> descending_with(std::vector<double> pts, double extra) {
    pts.push_back(extra);
    std::sort(pts.begin(), pts.end(), std::greater<double>());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace detail

struct VLambdaOptions {
    double inner_factor = 1e-8;  // innermost radius in units of lambda^{-1/(4-d)}
    double log_ftol = 1e-11;
};

// Radial solution of Delta u / 2 = u^2 / 2 - lambda delta_0 on R^d.
inline RadialSolution solve_v_lambda(int d, double lambda, const std::vector<double>& grid,
                                     const VLambdaOptions& opt = {}) {
    check_dim(d);
    if (!(lambda > 0) || !std::isfinite(lambda)) throw domain_error("solve_v_lambda: lambda must be positive and finite");
    check_grid(grid);
    const ExponentTable ex = exponents(d);
    const double ell = std::pow(lambda, -1.0 / (4 - d));
    const double r_in = std::min(opt.inner_factor * ell, 0.5 * grid.front());
    const double far = grid.back();

    int evals = 0;
    std::vector<double> history;
    auto F = [&](double logA) {
        ++evals;
        const InwardRun run = integrate_inward(d, std::exp(logA), far, {r_in});
        double val;
        if (run.status == InwardStatus::nonpositive) val = -std::numeric_limits<double>::infinity();
        else if (run.status == InwardStatus::blowup) val = std::numeric_limits<double>::infinity();
        else {
            const double fl = detail::source_flux(d, r_in, run.states.back());
            val = fl > 0 ? std::log(fl / lambda) : -std::numeric_limits<double>::infinity();
        }
        history.push_back(logA);
        history.push_back(val);
        return val;
    };

    // log flux is decreasing in log A with slope close to -1/alpha.
    double a0 = -ex.alpha * std::log(lambda);
    double f0 = F(a0);
    if (f0 == 0) f0 = 0;
    double a1 = a0, f1 = f0;
    bool bracketed = false;
    for (int k = 0; k < 60 && !bracketed; ++k) {
        double step = std::isfinite(f0) ? ex.alpha * f0 * 1.05 : (f0 > 0 ? 2.0 : -2.0);
        if (std::abs(step) < 1e-6) step = f0 > 0 ? 1e-6 : -1e-6;
        a1 = a0 + step;
        f1 = F(a1);
        if (f1 == 0 || std::signbit(f1) != std::signbit(f0)) {
            bracketed = true;
        } else {
            a0 = a1;
            f0 = f1;
        }
    }
    if (!bracketed) throw convergence_error("solve_v_lambda: could not bracket the far-field coefficient", history);
    double logA = a1;
    if (f1 != 0) logA = solve_bracketed(F, a0, f0, a1, f1, 1e-14 * std::max(1.0, std::abs(a1)), opt.log_ftol).x;

    RadialSolution sol;
    sol.kind = SolutionKind::v_lambda;
    sol.d = d;
    sol.lambda = lambda;
    sol.epsilon = 0;
    sol.far_coeff = std::exp(logA);
    const auto pts = detail::descending_with(grid, r_in);
    const InwardRun run = integrate_inward(d, sol.far_coeff, far, pts);
    if (run.status != InwardStatus::ok) throw convergence_error("solve_v_lambda: final pass did not complete", history);
    sol.flux = detail::source_flux(d, r_in, run.states.back());
    sol.r_inner = r_in;
    sol.shooting_evals = evals;
    for (std::size_t i = pts.size(); i-- > 0;) {
        if (pts[i] == r_in && !std::binary_search(grid.begin(), grid.end(), r_in)) continue;
        sol.r.push_back(pts[i]);
        sol.u.push_back(run.states[i][0]);
        sol.du.push_back(run.states[i][1] / pts[i]);
    }
    return sol;
}

struct ExitOptions {
    double log_ftol = 1e-11;
    double collar_start = 0.02;     // initial collar width, units of eps
    double collar_rtol = 1e-7;      // refinement stopping rule
    int collar_max_refinements = 10;
};

namespace detail {

struct ExitShot {
    double A = 0;
    int evals = 0;
    std::vector<double> history;
};

// Find A with u_A(r_match) = target, where u is monotone decreasing in A.
inline ExitShot shoot_exit(int d, double r_match, double target, double far, const ExitOptions& opt) {
    const ExponentTable ex = exponents(d);
    ExitShot shot;
    auto G = [&](double A) {
        ++shot.evals;
        const InwardRun run = integrate_inward(d, A, far, {r_match}, 1e3 * target);
        double v;
        if (run.status == InwardStatus::blowup) v = std::numeric_limits<double>::infinity();
        else if (run.status == InwardStatus::nonpositive) v = -std::numeric_limits<double>::infinity();
        else v = std::log(run.states.back()[0] / target);
        shot.history.push_back(A);
        shot.history.push_back(v);
        return v;
    };
    const double scale = std::pow(r_match, ex.p - 2) * 2.0 * (4 - d);
    const double g0 = G(0.0);
    if (g0 == 0) return shot;
    const double dir = g0 > 0 ? 1.0 : -1.0;
    double a_prev = 0, g_prev = g0;
    for (int k = 0; k < 200; ++k) {
        const double a = dir * scale * std::ldexp(1.0, k - 4);
        const double g = G(a);
        if (g == 0) {
            shot.A = a;
            return shot;
        }
        if (std::signbit(g) != std::signbit(g0)) {
            shot.A = solve_bracketed(G, a_prev, g_prev, a, g, 1e-14 * std::abs(a), opt.log_ftol).x;
            return shot;
        }
        a_prev = a;
        g_prev = g;
    }
    throw convergence_error("exit shooting: could not bracket the far-field coefficient", shot.history);
}

}  // namespace detail

// Radial solution of Delta u = u^2 on |x| > eps with u = lambda on |x| = eps
// (lambda = +inf allowed) and u -> 0 at infinity.
inline RadialSolution solve_u_exit(int d, double lambda, double eps, const std::vector<double>& grid,
                                   const ExitOptions& opt = {}) {
    check_dim(d);
    if (!(eps > 0) || !std::isfinite(eps)) throw domain_error("solve_u_exit: epsilon must be positive");
    if (!(lambda > 0)) throw domain_error("solve_u_exit: lambda must be positive");
    check_grid(grid);
    if (grid.front() < eps) throw domain_error("solve_u_exit: grid must lie in |x| >= epsilon");
    const double far = std::max(grid.back(), 10 * eps);

    RadialSolution sol;
    sol.d = d;
    sol.lambda = lambda;
    sol.epsilon = eps;

    if (std::isfinite(lambda)) {
        sol.kind = SolutionKind::u_exit;
        const auto shot = detail::shoot_exit(d, eps, lambda, far, opt);
        sol.far_coeff = shot.A;
        sol.shooting_evals = shot.evals;
        auto pts = grid;
        std::sort(pts.begin(), pts.end(), std::greater<double>());
        if (pts.back() > eps) pts.push_back(eps);
        const InwardRun run = integrate_inward(d, shot.A, far, pts);
        if (run.status != InwardStatus::ok) throw convergence_error("solve_u_exit: final pass failed", shot.history);
        for (std::size_t i = pts.size(); i-- > 0;) {
            if (pts[i] == eps && grid.front() != eps) continue;
            sol.r.push_back(pts[i]);
            sol.u.push_back(pts[i] == eps ? lambda : run.states[i][0]);
            sol.du.push_back(run.states[i][1] / pts[i]);
        }
        sol.r_inner = eps;
        return sol;
    }

    sol.kind = SolutionKind::u_exit_infinite;
    const double r_ref = 2 * eps;
    double h = opt.collar_start;
    double prev = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> trail;
    for (int k = 0; k <= opt.collar_max_refinements; ++k, h /= 2) {
        const double rc = eps * (1 + h);
        const auto shot = detail::shoot_exit(d, rc, blowup_asymptote(d, eps, rc), far, opt);
        const InwardRun run = integrate_inward(d, shot.A, far, {r_ref});
        if (run.status != InwardStatus::ok) throw convergence_error("solve_u_exit: reference pass failed", shot.history);
        const double val = run.states.back()[0];
        trail.push_back(h);
        trail.push_back(val);
        sol.shooting_evals += shot.evals;
        if (std::isfinite(prev) && std::abs(val - prev) <= opt.collar_rtol * std::abs(val)) {
            sol.far_coeff = shot.A;
            sol.collar = h;
            std::vector<double> pts;
            for (double r : grid)
                if (r >= rc) pts.push_back(r);
            std::sort(pts.begin(), pts.end(), std::greater<double>());
            std::vector<Vec<2>> states;
            if (!pts.empty()) {
                const InwardRun fin = integrate_inward(d, shot.A, far, pts);
                if (fin.status != InwardStatus::ok) throw convergence_error("solve_u_exit: final pass failed", trail);
                states = fin.states;
            }
            for (double r : grid) {
                sol.r.push_back(r);
                if (r >= rc) {
                    const std::size_t j = static_cast<std::size_t>(
                        std::find(pts.begin(), pts.end(), r) - pts.begin());
                    sol.u.push_back(states[j][0]);
                    sol.du.push_back(states[j][1] / r);
                } else if (r > eps) {
                    sol.u.push_back(blowup_asymptote(d, eps, r));
                    const double s = r - eps;
                    sol.du.push_back(-12 / (s * s * s));
                } else {
                    sol.u.push_back(std::numeric_limits<double>::infinity());
                    sol.du.push_back(-std::numeric_limits<double>::infinity());
                }
            }
            sol.r_inner = rc;
            return sol;
        }
        prev = val;
    }
    throw convergence_error("solve_u_exit: collar refinement did not converge", trail);
}

}  // namespace sbm
