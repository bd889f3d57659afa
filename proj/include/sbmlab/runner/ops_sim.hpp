#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sbmlab/csbp/csbp.hpp"
#include "sbmlab/radial/solvers.hpp"
#include "sbmlab/runner/ops_pde.hpp"
#include "sbmlab/sim/cloud.hpp"
#include "sbmlab/sim/experiments.hpp"

namespace sbm::ops {

inline double n_param(Params& p, double def) {
    const double N = p.num("N", def);
    p.check(N >= 1 && N == std::floor(N), "N", "must be a positive integer");
    return N;
}

// Event cap per replicate, in units of N^2 (the typical event count per unit
// of total mass-time).
inline std::uint64_t cap_param(Params& p, double N, double def) {
    const double f = p.num("cap_per_n2", def);
    p.check(f > 0, "cap_per_n2", "must be positive");
    return static_cast<std::uint64_t>(std::min(f * N * N, 9e18));
}

// Extinction by time t from mass y0 at the origin, against exp(-2 y0/t).
inline Job sim_normalization(Params& p) {
    const double N = n_param(p, 1e3);
    const double t = p.num("t", 1.0);
    const double y0 = p.num("y0", 1.0);
    const std::size_t n = p.replicates(4000);
    const std::uint64_t cap = cap_param(p, N, 1e3);
    p.check(t > 0 && std::isfinite(t), "t", "must be positive and finite");
    p.check(y0 > 0, "y0", "must be positive");
    p.check(std::abs(y0 * N - std::round(y0 * N)) < 1e-9, "y0", "y0 * N must be an integer");
    p.check(n >= 10, "replicates", "need at least 10");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        SimConfig cfg;
        cfg.d = 1;
        cfg.N = N;
        cfg.horizon = t;
        cfg.initial = {Atom{{0, 0, 0}, y0}};
        cfg.master_seed = ctx.seed;
        cfg.cap = cap;
        const auto s = run_extinction(cfg, n, static_cast<int>(ctx.workers));
        const double f = s.frequency();
        const std::size_t nv = n - s.n_censored();
        const double sbm = std::exp(-2 * y0 / t);
        const double fin = finite_n_extinction_by(t, N, y0);
        const double se = std::sqrt(fin * (1 - fin) / nv);
        const double c_hat = -t * std::log(f) / y0;
        auto& tab = out.table("normalization", {"N", "t", "y0", "replicates", "censored", "extinct_frequency", "binomial_se",
                                                "sbm_target", "finite_n_target", "measured_constant"});
        tab.row({fmt_num(N), fmt_num(t), fmt_num(y0), fmt_num(n), fmt_num(s.n_censored()), fmt_num(f), fmt_num(se), fmt_num(sbm),
                 fmt_num(fin), fmt_num(c_hat)});
        out.gate("normalization oracle: extinction by t vs exp(-2y0/t)", 6, "abs", f, sbm, tol::normalization,
                 "measured constant " + fmt_num(c_hat) + " (expected 2)");
        out.z_gate("extinction by t vs exact finite-N law", 6, f, se, fin, tol::z_max);
        return out;
    };
}

// Synchronous scheme against its own exact laws: extinction by the
// offspring recursion and conservation of the mean mass.
inline Job sim_step_scheme(Params& p) {
    const double N = n_param(p, 100);
    const double dt = p.num("dt", 1e-3);
    const double t = p.num("t", 1.0);
    const std::size_t n = p.replicates(1000);
    p.check(dt > 0 && N * dt <= 0.1 + 1e-12, "dt", "need N * dt <= 0.1");
    p.check(t > 0 && std::isfinite(t), "t", "must be positive and finite");
    p.check(n >= 10, "replicates", "need at least 10");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        SimConfig cfg;
        cfg.d = 2;
        cfg.N = N;
        cfg.dt = dt;
        cfg.horizon = t;
        cfg.master_seed = ctx.seed;
        std::vector<double> mass(n);
        std::vector<std::uint8_t> ext(n);
        std::vector<double> x2(n);
        parallel_for(n, ctx.workers, [&](std::size_t i) {
            Rng rng = Rng::stream(ctx.seed, i);
            auto c = make_cloud(cfg);
            run_cloud(c, cfg, rng);
            mass[i] = c.total_mass();
            ext[i] = c.extinct();
            double s = 0;
            for (const auto& x : c.alive) s += (x[0] * x[0] + x[1] * x[1]) * c.mass;
            x2[i] = s;
        });
        RunningStats m, e, q;
        for (std::size_t i = 0; i < n; ++i) {
            m.add(mass[i]);
            e.add(ext[i]);
            q.add(x2[i]);
        }
        const std::size_t k = static_cast<std::size_t>(std::llround(t / dt));
        const double pe = step_extinction_prob(N, dt, k, N);
        auto& tab = out.table("step_scheme", {"quantity", "estimate", "stderr", "target"});
        tab.row({"mean total mass", fmt_num(m.mean()), fmt_num(m.stderr_mean()), "1"});
        tab.row({"extinction frequency", fmt_num(e.mean()), fmt_num(std::sqrt(pe * (1 - pe) / n)), fmt_num(pe)});
        tab.row({"E <X_t, |x|^2>", fmt_num(q.mean()), fmt_num(q.stderr_mean()), fmt_num(2 * k * dt)});
        out.z_gate("mean mass conserved", 0, m.mean(), m.stderr_mean(), 1.0, tol::z_max);
        out.z_gate("extinction vs offspring recursion", 0, e.mean(), std::sqrt(pe * (1 - pe) / n), pe, tol::z_max);
        out.z_gate("E <X_t,|x|^2> = d t", 0, q.mean(), q.stderr_mean(), 2 * k * dt, tol::z_max);
        return out;
    };
}

// Exit mass on the sphere |y| = epsilon from mass y0 at distance x.
inline Job sim_exit_sphere(Params& p) {
    const int d = dim_param(p, "d", 3);
    const double x = p.num("x", 1.0);
    const double eps = p.num("epsilon", 0.1);
    const double y0 = p.num("y0", 1.0);
    const double N = n_param(p, 50);
    const double far = p.num("escape_radius", 20.0);
    const auto lambdas = p.list("lambdas", {1, 10, std::numeric_limits<double>::infinity()});
    const std::size_t n = p.replicates(10000);
    const std::uint64_t cap = cap_param(p, N, 5000);
    p.check(d >= 2, "d", "sphere exit needs d = 2 or 3");
    p.check(eps > 0 && x > eps, "x", "need 0 < epsilon < x");
    p.check(far > x, "escape_radius", "must exceed x");
    p.check(y0 > 0 && std::abs(y0 * N - std::round(y0 * N)) < 1e-9, "y0", "y0 * N must be a positive integer");
    check_positive(p, lambdas, "lambdas");
    p.check(n >= 10, "replicates", "need at least 10");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        SimConfig cfg;
        cfg.N = N;
        cfg.cap = cap;
        cfg.master_seed = ctx.seed;
        const auto s = run_exit_sphere(d, {x, 0, 0}, eps, cfg, n, y0, far, static_cast<int>(ctx.workers));
        auto& tab = out.table("exit_sphere", {"lambda", "replicates", "censored", "lo", "hi", "se", "finite_n_target",
                                              "sbm_target", "z", "escape_factor"});
        for (double lam : lambdas) {
            const auto un = solve_u_exit(d, finite_n_lambda(lam, N), eps, {x, far}).u;
            const auto u = solve_u_exit(d, lam, eps, {x}).u;
            const double target = finite_n_transform(un[0], N, y0);
            const double sbm = std::exp(-y0 * u[0]);
            const double esc = 1 - un[1] / N;
            const auto c = laplace_check(s, lam, target, tol::z_max, esc);
            tab.row({fmt_num(lam), fmt_num(c.n), fmt_num(c.n_censored), fmt_num(c.lo), fmt_num(c.hi), fmt_num(c.se), fmt_num(target),
                     fmt_num(sbm), fmt_num(c.z), fmt_num(esc)});
            const std::string what = "sphere: " + std::string(std::isinf(lam) ? "P(exit mass = 0)" : "E exp(-lambda exit mass), lambda=" + fmt_num(lam));
            out.gate(what + " vs exp(-U) at N=" + fmt_num(N), 6, "z", 0.5 * (c.lo + c.hi), target, tol::z_max,
                     "bracket [" + fmt_num(c.lo) + ", " + fmt_num(c.hi) + "], " + fmt_num(c.n_censored) + " censored", c.z);
        }
        return out;
    };
}

// Frequency of 0 < exit mass < epsilon^(2-eta) as epsilon shrinks.
inline Job sim_exit_tail(Params& p) {
    const int d = dim_param(p, "d", 3);
    const double x = p.num("x", 1.0);
    const auto eps = p.list("epsilons", {0.4, 0.2, 0.1});
    const double eta = p.num("eta", 0.1);
    const double N = n_param(p, 400);
    const double far = p.num("escape_radius", 10.0);
    const std::size_t n = p.replicates(200);
    const std::uint64_t cap = cap_param(p, N, 200);
    p.check(d >= 2, "d", "needs d = 2 or 3");
    check_positive(p, eps, "epsilons");
    for (double e : eps) p.check(e < x, "epsilons", "must be below x");
    p.check(eta > 0 && eta < 1, "eta", "must lie in (0, 1)");
    p.check(far > x, "escape_radius", "must exceed x");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        auto& tab = out.table("exit_tail", {"epsilon", "threshold", "replicates", "censored", "small_positive", "positive", "frequency"});
        std::vector<double> xs, ys;
        for (std::size_t k = 0; k < eps.size(); ++k) {
            SimConfig cfg;
            cfg.N = N;
            cfg.cap = cap;
            cfg.master_seed = derive_seed(ctx.seed, "eps" + std::to_string(k));
            const auto s = run_exit_sphere(d, {x, 0, 0}, eps[k], cfg, n, 1.0, far, static_cast<int>(ctx.workers));
            const double thr = std::pow(eps[k], 2 - eta);
            std::size_t small = 0, pos = 0, valid = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s.censored[i]) continue;
                ++valid;
                if (s.mass[i] > 0) ++pos;
                if (s.mass[i] > 0 && s.mass[i] < thr) ++small;
            }
            const double f = valid ? static_cast<double>(small) / valid : 0;
            tab.row({fmt_num(eps[k]), fmt_num(thr), fmt_num(n), fmt_num(s.n_censored()), fmt_num(small), fmt_num(pos), fmt_num(f)});
            if (small > 0) {
                xs.push_back(eps[k]);
                ys.push_back(f);
            }
        }
        const double pd = exponents(d).p;
        if (xs.size() >= 2) {
            const auto fit = loglog_fit(xs, ys, "small exit mass");
            out.gate("slope of P(0<M<eps^(2-eta)) in eps (bound allows up to p-2)", 0, "min", fit.estimate, 0, 0,
                     "p-2 = " + fmt_num(pd - 2) + "; mass quantum 1/N = " + fmt_num(1 / N));
            out.diagnostic();
            out.plots.push_back({"fit_exit_tail", fit, "small positive exit mass", "log epsilon", "log frequency"});
        } else {
            out.check("small exit mass observed at two or more epsilons", 0, false, "mass quantum 1/N = " + fmt_num(1 / N));
            out.diagnostic();
        }
        return out;
    };
}

// d = 1 half-space exit process Y_r against its CSBP law.
inline Job sim_exit_halfspace(Params& p) {
    const double y0 = p.num("y0", 1.0);
    const double N = n_param(p, 100);
    const auto levels = p.list("levels", {0.5, 0.9, 1.0});
    const auto lambdas = p.list("lambdas", {1, 6, std::numeric_limits<double>::infinity()});
    const auto gated = p.list("gated_slopes", {1});
    const std::size_t n = p.replicates(20000);
    const std::uint64_t cap = cap_param(p, N, 1000);
    p.check(y0 > 0 && std::abs(y0 * N - std::round(y0 * N)) < 1e-9, "y0", "y0 * N must be a positive integer");
    check_positive(p, levels, "levels");
    check_increasing(p, levels, "levels");
    check_positive(p, lambdas, "lambdas");
    std::vector<std::size_t> gidx;
    for (double g : gated) {
        p.check(g >= 0 && g == std::floor(g) && g + 1 < levels.size(), "gated_slopes", "must index a level with a successor");
        gidx.push_back(static_cast<std::size_t>(g));
    }
    p.check(n >= 10, "replicates", "need at least 10");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        SimConfig cfg;
        cfg.N = N;
        cfg.cap = cap;
        cfg.master_seed = ctx.seed;
        const auto paths = run_exit_halfspace_d1(y0, levels, cfg, n, static_cast<int>(ctx.workers));
        CsbpParams prm;
        prm.y0 = y0;
        const auto rep = validate_exit_law(paths, prm, lambdas, gidx, tol::martingale_slope);
        out.tables.emplace_back("exit_law", rep.to_csv());
        for (const auto& c : rep.cells) {
            const std::string at = " r=" + fmt_num(c.r);
            if (c.kind == "laplace" || c.kind == "extinction") {
                const std::string what =
                    "half-space: " + (c.kind == "extinction" ? "P(Y_r=0)" + at : "E exp(-lambda Y_r), lambda=" + fmt_num(c.lambda) + at);
                out.gate(what + " vs CSBP law at N=" + fmt_num(N), 6, "z", c.estimate, c.target, tol::z_max,
                         "bracket [" + fmt_num(c.lo) + ", " + fmt_num(c.hi) + "], " + fmt_num(c.n_censored) + " censored", c.z);
                if (c.underpowered) out.diagnostic();
                const double zs = std::abs(c.estimate - c.sbm_target) / c.se;
                out.gate(what + " vs N=inf law", 6, "z", c.estimate, c.sbm_target, tol::z_max, "finite-N correction included", zs);
                out.diagnostic();
            } else if (c.kind == "mean") {
                out.z_gate("E Y_r" + at, 6, c.estimate, c.se, c.target, tol::z_max, "infinite variance, reported only");
                out.diagnostic();
            } else if (c.kind == "martingale") {
                out.gate("martingale slope Y_" + fmt_num(c.r2) + " on Y_" + fmt_num(c.r), 0, "abs", c.estimate, 1.0,
                         tol::martingale_slope, "OLS, n=" + fmt_num(c.n) + ", SE " + fmt_num(c.se));
                if (!c.gated || c.underpowered) out.diagnostic();
            }
        }
        auto& cen = out.table("censoring", {"level", "censored_by_level"});
        for (std::size_t k = 0; k < levels.size(); ++k) cen.row({fmt_num(levels[k]), fmt_num(paths.level(k).n_censored())});
        return out;
    };
}

}  // namespace sbm::ops
