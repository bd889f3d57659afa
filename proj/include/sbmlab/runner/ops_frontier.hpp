#pragma once

#include <algorithm>
#include <cctype>
#include <limits>
#include <cmath>
#include <string>
#include <vector>

#include "sbmlab/frontier/diagnostics.hpp"
#include "sbmlab/frontier/energy.hpp"
#include "sbmlab/frontier/experiments.hpp"
#include "sbmlab/frontier/frontier.hpp"
#include "sbmlab/frontier/levy.hpp"
#include "sbmlab/frontier/tails.hpp"
#include "sbmlab/runner/ops_sim.hpp"

namespace sbm::ops {

// d = 1: the frontier of {L > tau} should be exactly two cells.
inline Job frontier_d1(Params& p) {
    const double N = n_param(p, 1000);
    // Default cell side: three particle lifetimes of Brownian travel, 3/sqrt(N).
    const double h = p.num("h", 3 / std::sqrt(N));
    const double half = p.num("half_width", 10.0);
    const double tau = p.num("tau", 0.0);
    const std::size_t n = p.replicates(100);
    const std::uint64_t cap = cap_param(p, N, 50);
    p.check(h > 0 && half > 4 * h, "h", "need 0 < 4h < half_width");
    p.check(tau >= 0, "tau", "must be non-negative (0 = 1st percentile per replicate)");
    p.check(n >= 10, "replicates", "need at least 10");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        SimConfig cfg;
        cfg.d = 1;
        cfg.N = N;
        cfg.cap = cap;
        cfg.master_seed = ctx.seed;
        const auto r = run_frontier(cfg, half, h, tau, n, static_cast<int>(ctx.workers));
        auto& t = out.table("frontier_d1", {"replicate", "frontier_cells", "positive_cells", "censored", "outside_occupation"});
        for (std::size_t i = 0; i < n; ++i)
            t.row({fmt_num(i), fmt_num(r.frontier_cells[i]), fmt_num(r.positive_cells[i]), fmt_num(static_cast<int>(r.censored[i])),
                   fmt_num(r.outside[i])});
        const std::size_t valid = r.n_valid();
        const double frac = valid ? static_cast<double>(r.count_equal(2)) / valid : 0.0;
        out.gate("fraction of replicates with exactly 2 frontier cells", 7, "min", frac, tol::frontier_fraction, 0,
                 fmt_num(r.count_equal(2)) + " of " + fmt_num(valid) + " uncensored, " + fmt_num(n - valid) + " censored excluded");
        return out;
    };
}

// Left tail of the local time: P(0 < L^x <= a) ~ a^alpha.
inline Job frontier_tails(Params& p) {
    const int d = dim_param(p, "d", 1);
    const double N = n_param(p, 1000);
    const double h = p.num("h", d == 1 ? 0.05 : 0.1);
    const auto xs = p.list("xs", {1, 1.5, 2});
    // Two decades of a; in d = 3 one particle lifetime adds about 1/(N^2 h^3)
    // to a cell, so the window starts above that quantum.
    const auto as = p.list("a_grid", d == 1 ? std::vector<double>{1e-3, 3e-3, 1e-2, 3e-2, 1e-1}
                                            : std::vector<double>{3e-3, 1e-2, 3e-2, 1e-1, 3e-1});
    const int a_ref = p.integer("a_ref", static_cast<int>(as.size()) - 1);
    const double substep = p.num("occupation_substep", d == 1 ? 0.25 * h * h : 0.0);
    const std::size_t n = p.replicates(500);
    const std::uint64_t cap = cap_param(p, N, 50);
    p.check(h > 0, "h", "must be positive");
    check_positive(p, xs, "xs");
    check_increasing(p, xs, "xs");
    check_positive(p, as, "a_grid");
    check_increasing(p, as, "a_grid");
    p.check(as.size() >= 2, "a_grid", "need at least 2 values");
    p.check(a_ref >= 0 && a_ref < static_cast<int>(as.size()), "a_ref", "index into a_grid");
    p.check(substep >= 0, "occupation_substep", "must be non-negative");
    for (double x : xs) p.check(std::abs(x / h - std::round(x / h)) < 1e-9, "xs", "must be multiples of h (cell centres)");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        SimConfig cfg;
        cfg.d = d;
        cfg.N = N;
        cfg.cap = cap;
        cfg.master_seed = ctx.seed;
        cfg.occupation_substep = substep;
        std::vector<Pos> probes;
        std::vector<std::size_t> owner;
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (const auto& q : axis_probes(d, xs[i])) {
                probes.push_back(q);
                owner.push_back(i);
            }
        const auto s = run_local_time_probes(cfg, probes, h, as.back(), n, static_cast<int>(ctx.workers));
        // Pool the axis directions at each |x|; censored replicates are dropped.
        std::vector<std::vector<double>> samples(xs.size());
        for (std::size_t r = 0; r < n; ++r) {
            if (s.censored[r]) continue;
            for (std::size_t j = 0; j < probes.size(); ++j) samples[owner[j]].push_back(s.L[r][j]);
        }
        const auto fits = tail_exponents(samples, as, xs, 0, static_cast<std::size_t>(a_ref));
        out.tables.emplace_back("tail_table", fits.to_csv());
        out.warnings = fits.warnings;
        const auto ex = exponents(d);
        auto& lt = out.table("exact_local_slope", {"x", "a", "local_slope"});
        RunningStats exact;
        for (double a : as) {
            const double sl = laplace_local_slope(d, xs[0], a);
            lt.row({fmt_num(xs[0]), fmt_num(a), fmt_num(sl)});
            exact.add(sl);
        }
        const double atol = d == 1 ? tol::tail_alpha_d1 : tol::tail_alpha_d3;
        const int crit = d == 2 ? 0 : 8;
        const std::string sd = " d=" + std::to_string(d) + " |x|=" + fmt_num(xs[0]);
        const std::string info = fmt_num(n - s.n_censored()) + " uncensored replicates x " + fmt_num(2 * d) + " axis probes, N=" +
                                 fmt_num(N) + ", h=" + fmt_num(h) + ", a in [" + fmt_num(as.front()) + ", " + fmt_num(as.back()) + "]";
        if (fits.has_alpha) {
            out.gate("tail exponent alpha" + sd, crit, "abs", fits.alpha.estimate, ex.alpha, atol,
                     info + ", OLS SE " + fmt_num(fits.alpha.stderr_));
            out.plots.push_back({"fit_alpha", fits.alpha, "P(0 < L <= a)" + sd, "log a", "log probability"});
        } else {
            out.check("tail exponent alpha" + sd, crit, false, "fewer than 2 usable a values; " + info);
        }
        out.gate("exact-law local slope averaged over the same a window" + sd, crit, "abs", exact.mean(), ex.alpha, atol,
                 "from the radial PDE; what the simulation can reach at these a");
        out.diagnostic();
        if (fits.has_p) {
            out.gate("tail exponent p d=" + std::to_string(d) + " at a=" + fmt_num(as[static_cast<std::size_t>(a_ref)]), crit, "abs",
                     fits.p.estimate, ex.p, tol::tail_p_d3, info);
            out.diagnostic();
            out.plots.push_back({"fit_p", fits.p, "P(0 < L <= a) against |x|", "log |x|", "log probability"});
        }
        auto& cen = out.table("replicates", {"replicates", "censored", "mean_events"});
        RunningStats ev;
        for (auto e : s.events) ev.add(static_cast<double>(e));
        cen.row({fmt_num(n), fmt_num(s.n_censored()), fmt_num(ev.mean())});
        return out;
    };
}

// Box dimension of synthetic sets with known dimension.
inline Job frontier_synthetic(Params& p) {
    const int n2 = p.integer("n2", 512);
    const int n3 = p.integer("n3", 128);
    p.check(n2 >= 64, "n2", "need at least 64 cells per axis");
    p.check(n3 >= 64, "n3", "need at least 64 cells per axis");
    return [=](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("synthetic", {"set", "d", "cells", "dimension", "stderr", "r2", "target", "sandwich"});
        auto record = [&](const std::string& name, int d, const FrontierSet& fs, double target) {
            const auto fit = box_dimension(fs);
            const bool sw = box_count_sandwich(fs);
            t.row({name, fmt_num(d), fmt_num(fs.cells.size()), fmt_num(fit.estimate), fmt_num(fit.stderr_), fmt_num(fit.r2),
                   fmt_num(target), sw ? "1" : "0"});
            out.gate("box dimension of " + name, 9, "abs", fit.estimate, target, tol::synthetic_dimension);
            out.check("box-count sandwich for " + name, 9, sw);
            std::string stem;
            for (char c : name) stem += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
            out.plots.push_back({"fit_" + stem, fit, "box counts, " + name, "log 1/s", "log N(s)"});
        };
        const double h2 = 1.0 / n2;
        const auto line = indicator_field(2, n2, h2, [&](const std::array<int, 3>& c) { return c[1] == n2 / 2; });
        record("line segment d=2", 2, positive_set(line), 1.0);
        const auto square = indicator_field(2, n2, h2, [](const std::array<int, 3>&) { return true; });
        record("full square d=2", 2, positive_set(square), 2.0);
        out.gate("frontier of the all-positive square is the grid edge", 0, "abs",
                 static_cast<double>(extract_frontier(square, 0).cells.size()), 4.0 * (n2 - 1), 0);
        const auto empty = indicator_field(2, 64, 1.0, [](const std::array<int, 3>&) { return false; });
        out.gate("empty field has empty frontier", 0, "abs", static_cast<double>(extract_frontier(empty, 0).cells.size()), 0, 0);
        const auto ball2 = ball_field(2, n2, 0.4 * n2);
        record("discrete circle d=2", 2, extract_frontier(ball2, 0), 1.0);
        const auto ball3 = ball_field(3, n3, 0.4 * n3);
        record("discrete sphere d=3", 3, extract_frontier(ball3, 0), 2.0);
        // Interior of a field padded by zeros: positive everywhere inside.
        const auto inner = indicator_field(2, 64, 1.0, [](const std::array<int, 3>& c) {
            return c[0] > 0 && c[0] < 63 && c[1] > 0 && c[1] < 63;
        });
        const auto fs = extract_frontier(inner, 0);
        out.gate("frontier of a padded square is its boundary ring", 0, "abs", static_cast<double>(fs.cells.size()), 4.0 * 61, 0);
        return out;
    };
}

// Energy kernel and Levy exponent checks.
inline Job frontier_energy(Params& p) {
    const int m = p.integer("circle_points", 4000);
    p.check(m >= 100, "circle_points", "need at least 100");
    return [=](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("energy", {"check", "value", "target"});
        {
            const auto e = energy_integral({{0, 0, 0}, {1, 0, 0}}, {1, 1}, 0.7, 2);
            t.row({"two points at distance 1", fmt_num(e.value), "2"});
            out.gate("energy of two unit points at distance 1", 0, "abs", e.value, 2.0, tol::closed_form);
        }
        {
            // Midpoint rule in angle; the diagonal singularity is integrable for beta < 1.
            std::vector<Pos> pts;
            std::vector<double> w(static_cast<std::size_t>(m), 1.0 / m);
            for (int i = 0; i < m; ++i) {
                const double th = 2 * M_PI * (i + 0.5) / m;
                pts.push_back({std::cos(th), std::sin(th), 0});
            }
            // Each point stands for an arc of length l; its own energy
            // 2 l^-beta / ((1-beta)(2-beta)) per unit mass squared is added back.
            const double beta = 0.5, l = 2 * M_PI / m;
            const double self = m * std::pow(1.0 / m, 2) * 2 * std::pow(l, -beta) / ((1 - beta) * (2 - beta));
            const double e = energy_integral(pts, w, beta, 2).value + self;
            const double ex = circle_energy_exact(beta);
            t.row({"uniform circle beta=1/2, " + std::to_string(m) + " points, with arc self-energy", fmt_num(e), fmt_num(ex)});
            out.gate("circle energy beta=1/2 vs exact", 0, "rel", e, ex, tol::energy_relative, "arc self-energy " + fmt_num(self));
        }
        {
            std::vector<double> vals;
            for (int k : {8, 16, 32}) {
                std::vector<Pos> pts;
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) pts.push_back({(i + 0.5) / k, (j + 0.5) / k, 0});
                std::vector<double> w(pts.size(), 1.0 / pts.size());
                vals.push_back(energy_integral(pts, w, 2.5, 2).value);
                t.row({"unit square grid " + std::to_string(k) + "^2, beta=2.5", fmt_num(vals.back()), ""});
            }
            out.check("energy diverges under refinement for beta >= d", 0, vals[0] < vals[1] && vals[1] < vals[2] && vals[2] > 2 * vals[0]);
        }
        auto& ps = out.table("levy_psi", {"d", "beta", "theta", "psi", "ratio"});
        for (int d : {2, 3}) {
            const double beta = exponents(d).p - 2;
            const std::string sd = " d=" + std::to_string(d);
            double worst = 0;
            for (double th : {0.3, 2.0, 17.0}) worst = std::max(worst, std::abs(levy_psi(th, beta).value - levy_psi(-th, beta).value));
            out.gate("psi(theta) = psi(-theta)" + sd, 0, "max", worst, 1e-12, 0);
            const double r3 = levy_psi(1e-3, beta).value / std::pow(1e-3, beta);
            const double r4 = levy_psi(1e-4, beta).value / std::pow(1e-4, beta);
            out.gate("psi/|theta|^beta at 1e-3 vs 1e-4" + sd, 0, "rel", r3, r4, tol::psi_small_theta);
            const auto sw = psi_sandwich(beta);
            for (std::size_t i = 0; i < sw.theta.size(); ++i)
                ps.row({fmt_num(d), fmt_num(beta), fmt_num(sw.theta[i]), fmt_num(sw.ratio[i] * std::pow(sw.theta[i], beta) *
                                                                                   (1 + std::pow(std::max(0.0, std::log(sw.theta[i])), 2))),
                        fmt_num(sw.ratio[i])});
            out.gate("psi sandwich constants C/c over [1e-3, 1e3]" + sd, 0, "max", sw.spread(), tol::psi_spread, 0,
                     "c=" + fmt_num(sw.c_lo) + " C=" + fmt_num(sw.c_hi));
            out.diagnostic();
        }
        return out;
    };
}

// SBM local-time fields in d = 2, 3: frontier box dimension, explosion at the
// origin, Holder ratios and the two-point moment.  Diagnostics only.
inline Job frontier_dimension(Params& p) {
    const int d = dim_param(p, "d", 2);
    const double N = n_param(p, d == 2 ? 1000 : 300);
    const double half = p.num("half_width", 2.0);
    const int cells = p.integer("cells", d == 2 ? 512 : 128);
    const std::size_t n = p.replicates(8);
    const std::uint64_t cap = cap_param(p, N, 100);
    const double lambda = p.num("lambda", 10.0);
    p.check(d >= 2, "d", "needs d = 2 or 3");
    p.check(half > 1, "half_width", "must exceed 1");
    p.check(cells >= 64 && cells % 2 == 0, "cells", "need an even count >= 64");
    p.check(lambda > 0, "lambda", "must be positive");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        const double h = 2 * half / cells;
        const Pos o{-half, d > 1 ? -half : 0, d > 2 ? -half : 0};
        const OccupationGrid proto(d, o, h, {cells, cells, d > 2 ? cells : 1});
        SimConfig cfg;
        cfg.d = d;
        cfg.N = N;
        cfg.cap = cap;
        cfg.master_seed = ctx.seed;
        const auto ex = exponents(d);
        const double gamma = 0.5 * std::min((4 - d) / 2.0, 1.0);
        // Two-point probes on the unit sphere at growing separation.
        const std::vector<double> angles{0.1, 0.2, 0.4, 0.8, 1.6, 3.1};
        struct Rep {
            double dim = 0, dim_se = 0, explosion = 0, holder = 0;
            bool ok = false, censored = false;
            std::size_t frontier = 0;
            double base = 0;
            std::vector<double> pair;
        };
        std::vector<Rep> reps(n);
        parallel_for(n, ctx.workers, [&](std::size_t i) {
            Rng rng = Rng::stream(ctx.seed, i);
            OccupationGrid g = proto;
            LineageOptions opt;
            opt.sink = &g;
            opt.keep_frozen = false;
            LineageEngine eng(cfg, rng);
            const auto r = eng.run(opt);
            Rep& rp = reps[i];
            rp.censored = r.censored;
            const auto f = build_field(g, N, i);
            const auto fs = extract_frontier(f, default_tau(f));
            rp.frontier = fs.cells.size();
            try {
                const auto fit = box_dimension(fs);
                rp.dim = fit.estimate;
                rp.dim_se = fit.stderr_;
                rp.ok = true;
            } catch (const input_error&) {
                rp.ok = false;
            }
            // Cells touching the origin against the median positive value.
            std::vector<double> pos;
            for (double v : f.values)
                if (v > 0) pos.push_back(v);
            double near = 0;
            for (std::size_t k = 0; k < f.size(); ++k) {
                const Pos c = f.center(k);
                bool adj = true;
                for (int a = 0; a < d; ++a) adj = adj && std::abs(c[a]) < h;
                if (adj) near = std::max(near, f.values[k]);
            }
            if (!pos.empty()) {
                std::nth_element(pos.begin(), pos.begin() + static_cast<long>(pos.size() / 2), pos.end());
                rp.explosion = near / pos[pos.size() / 2];
            }
            rp.holder = holder_ratio(f, gamma, 0.5, 1.5);
            auto at = [&](const Pos& x) {
                const long long k = g.index_of(x);
                return k < 0 ? 0.0 : f.values[static_cast<std::size_t>(k)];
            };
            rp.base = at({1, 0, 0});
            for (double th : angles) rp.pair.push_back(at({std::cos(th), std::sin(th), 0}));
        });
        auto& t = out.table("dimension_replicates", {"replicate", "frontier_cells", "box_dimension", "stderr", "explosion_ratio",
                                                     "holder_ratio", "censored"});
        RunningStats dims, expl;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = reps[i];
            t.row({fmt_num(i), fmt_num(r.frontier), r.ok ? fmt_num(r.dim) : "", r.ok ? fmt_num(r.dim_se) : "", fmt_num(r.explosion),
                   fmt_num(r.holder), r.censored ? "1" : "0"});
            if (r.ok && !r.censored) dims.add(r.dim);
            if (!r.censored) expl.add(r.explosion);
        }
        const std::string sd = " d=" + std::to_string(d);
        out.gate("frontier box dimension" + sd, 9, "abs", dims.count() ? dims.mean() : 0.0, ex.boundary_dim, tol::sbm_dimension,
                 fmt_num(dims.count()) + " replicates, N=" + fmt_num(N) + ", h=" + fmt_num(h));
        out.diagnostic();
        out.gate("field at origin cells / median positive value" + sd, 0, "min", expl.count() ? expl.mean() : 0.0, tol::field_explosion,
                 0, "mean over replicates");
        out.diagnostic();
        auto& tp = out.table("two_point", {"angle", "separation", "moment", "stderr", "normalized"});
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (std::size_t k = 0; k < angles.size(); ++k) {
            std::vector<double> l1, l2;
            for (const auto& r : reps)
                if (!r.censored) {
                    l1.push_back(r.base);
                    l2.push_back(r.pair[k]);
                }
            if (l1.empty()) continue;
            const auto m = two_point_moment(l1, l2, lambda, ex.alpha);
            const double sep = 2 * std::sin(angles[k] / 2);
            const double norm = m.value / (1 + std::pow(sep, 2 - ex.p));
            tp.row({fmt_num(angles[k]), fmt_num(sep), fmt_num(m.value), fmt_num(m.stderr_), fmt_num(norm)});
            if (norm > 0) {
                lo = std::min(lo, norm);
                hi = std::max(hi, norm);
            }
        }
        out.gate("two-point moment / (1+|x1-x2|^(2-p)) max/min" + sd, 0, "max", hi > 0 ? hi / lo : 0.0, 10.0, 0,
                 "bounded in the separation; small-sample estimate");
        out.diagnostic();
        return out;
    };
}

}  // namespace sbm::ops
