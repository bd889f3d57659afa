#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/parallel.hpp"
#include "sbmlab/core/rng.hpp"
#include "sbmlab/core/stats.hpp"
#include "sbmlab/sim/config.hpp"
#include "sbmlab/sim/lineage.hpp"

namespace sbm {

// Per-replicate exit masses.  A censored replicate stopped at the event cap;
// its mass is the frozen mass so far, a lower bound for the full value.
struct ExitSamples {
    std::vector<double> mass;
    std::vector<std::uint8_t> censored;
    std::vector<std::uint64_t> events;
    std::vector<std::uint32_t> escaped;  // particles stopped on the escape sphere
    double escape_radius = std::numeric_limits<double>::infinity();
    double N = 0;
    double y0 = 1;

    std::size_t size() const { return mass.size(); }
    std::size_t n_censored() const { return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1)); }
};

// Exit mass on the sphere |y| = eps.  With a finite escape radius, particles
// reaching |y| = escape_radius are stopped and counted; each contributes the
// factor 1 - U(escape_radius)/N to the Laplace transform (strong Markov
// property), see laplace_check.
inline ExitSamples run_exit_sphere(int d, const Pos& x, double eps, SimConfig cfg, std::size_t n_reps, double y0 = 1,
                                   double escape_radius = std::numeric_limits<double>::infinity(), int workers = 0) {
    cfg.d = d;
    const Pos origin{0, 0, 0};
    if (!(eps > 0)) throw domain_error("run_exit_sphere: epsilon must be positive");
    if (!(dist(x, origin, d) > eps)) throw domain_error("run_exit_sphere: starting point must lie outside the ball");
    if (!(escape_radius > dist(x, origin, d))) throw domain_error("run_exit_sphere: escape radius must exceed |x|");
    cfg.surfaces = {Surface::sphere(origin, eps, Surface::Side::outside)};
    if (std::isfinite(escape_radius)) cfg.surfaces.push_back(Surface::sphere(origin, escape_radius, Surface::Side::inside));
    cfg.initial = {Atom{x, y0}};
    cfg.validate(false);
    ExitSamples out;
    out.N = cfg.N;
    out.y0 = y0;
    out.mass.assign(n_reps, 0.0);
    out.censored.assign(n_reps, 0);
    out.events.assign(n_reps, 0);
    out.escaped.assign(n_reps, 0);
    out.escape_radius = escape_radius;
    parallel_for(n_reps, resolve_workers(workers), [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.master_seed, i);
        LineageEngine eng(cfg, rng);
        LineageOptions opt;
        opt.keep_frozen = false;
        const auto r = eng.run(opt);
        out.mass[i] = r.frozen_mass[0];
        if (r.frozen_mass.size() > 1) out.escaped[i] = static_cast<std::uint32_t>(std::llround(r.frozen_mass[1] * cfg.N));
        out.censored[i] = r.censored;
        out.events[i] = r.events;
    });
    return out;
}

struct HalfspacePaths {
    std::vector<double> r_grid;
    std::vector<std::vector<double>> Y;  // Y[rep][level]
    std::vector<int> censored_at;        // first censored level, or -1
    std::vector<std::uint64_t> events;
    double N = 0;
    double y0 = 1;

    // Samples at one level; censored replicates give their lower bound.
    ExitSamples level(std::size_t k) const {
        ExitSamples s;
        s.N = N;
        s.y0 = y0;
        for (std::size_t i = 0; i < Y.size(); ++i) {
            s.mass.push_back(Y[i][k]);
            s.censored.push_back(censored_at[i] >= 0 && static_cast<std::size_t>(censored_at[i]) <= k);
            s.events.push_back(events[i]);
        }
        return s;
    }
};

// d = 1, mass y0 at the origin.  Level by level: freeze at r_k, then restart
// the frozen particles as the source for r_{k+1}.
inline HalfspacePaths run_exit_halfspace_d1(double y0, const std::vector<double>& r_grid, SimConfig cfg,
                                            std::size_t n_reps, int workers = 0) {
    if (r_grid.empty()) throw input_error("run_exit_halfspace_d1: empty r grid");
    if (!(r_grid[0] > 0)) throw input_error("run_exit_halfspace_d1: levels must be positive");
    for (std::size_t k = 1; k < r_grid.size(); ++k)
        if (!(r_grid[k] > r_grid[k - 1])) throw input_error("run_exit_halfspace_d1: r grid must be increasing");
    cfg.d = 1;
    cfg.initial = {Atom{{0, 0, 0}, y0}};
    cfg.surfaces = {Surface::halfspace(r_grid[0])};
    cfg.validate(false);
    HalfspacePaths out;
    out.r_grid = r_grid;
    out.N = cfg.N;
    out.y0 = y0;
    out.Y.assign(n_reps, std::vector<double>(r_grid.size(), 0.0));
    out.censored_at.assign(n_reps, -1);
    out.events.assign(n_reps, 0);
    const auto n0 = static_cast<std::size_t>(std::llround(y0 * cfg.N));
    parallel_for(n_reps, resolve_workers(workers), [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.master_seed, i);
        std::vector<LineageEngine::Node> roots(n0, LineageEngine::Node{{0, 0, 0}, 0.0});
        std::uint64_t used = 0;
        for (std::size_t k = 0; k < r_grid.size(); ++k) {
            SimConfig c = cfg;
            c.surfaces = {Surface::halfspace(r_grid[k])};
            c.cap = cfg.cap - used;
            LineageEngine eng(c, rng);
            const auto r = eng.run_from(roots, {});
            used += r.events;
            out.Y[i][k] = r.frozen_mass[0];
            if (r.censored) {
                out.censored_at[i] = static_cast<int>(k);
                for (std::size_t j = k + 1; j < r_grid.size(); ++j) out.Y[i][j] = 0;
                break;
            }
            roots.clear();
            for (const auto& f : r.frozen) roots.push_back({f.x, 0.0});
            if (used >= cfg.cap && k + 1 < r_grid.size()) {
                out.censored_at[i] = static_cast<int>(k + 1);
                break;
            }
        }
        out.events[i] = used;
    });
    return out;
}

struct ExtinctionSamples {
    std::vector<std::uint8_t> extinct;
    std::vector<std::uint8_t> censored;
    std::size_t n_censored() const { return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1)); }
    double frequency() const {
        std::size_t k = 0, n = 0;
        for (std::size_t i = 0; i < extinct.size(); ++i)
            if (!censored[i]) {
                ++n;
                k += extinct[i];
            }
        return n ? static_cast<double>(k) / n : std::numeric_limits<double>::quiet_NaN();
    }
};

// Extinction by cfg.horizon; a replicate stops as soon as one particle survives.
inline ExtinctionSamples run_extinction(SimConfig cfg, std::size_t n_reps, int workers = 0) {
    if (!std::isfinite(cfg.horizon)) throw domain_error("run_extinction: horizon must be finite");
    cfg.validate(false);
    ExtinctionSamples out;
    out.extinct.assign(n_reps, 0);
    out.censored.assign(n_reps, 0);
    parallel_for(n_reps, resolve_workers(workers), [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.master_seed, i);
        LineageEngine eng(cfg, rng);
        LineageOptions opt;
        opt.stop_on_survivor = true;
        const auto r = eng.run(opt);
        out.censored[i] = r.censored;
        out.extinct[i] = !r.censored && r.n_survivors == 0 && r.frozen_mass.size() == cfg.surfaces.size();
    });
    return out;
}

// Exact finite-N laws of the event-driven system.  With w = 1 - v/N the
// one-particle Laplace functional satisfies the same equation as the
// superprocess, with boundary value N(1 - exp(-lambda/N)).
inline double finite_n_lambda(double lambda, double N) {
    if (std::isinf(lambda)) return N;
    return -N * std::expm1(-lambda / N);
}
inline double finite_n_transform(double U, double N, double y0) { return std::exp(N * y0 * std::log1p(-U / N)); }
inline double finite_n_extinction_by(double t, double N, double y0) {
    return std::exp(N * y0 * std::log1p(-1.0 / (1.0 + N * t / 2.0)));
}

struct LaplaceCheck {
    double lambda = 0;
    double target = 0;
    double lo = 0, hi = 0;  // censored replicates at their two bounds
    double se = 0;
    double z = 0;  // distance from target to [lo, hi] in standard errors
    std::size_t n = 0, n_censored = 0;
    bool pass = false;
};

// E exp(-lambda M) for lambda in (0, inf]; lambda = inf gives P(M = 0).
// `escape_factor` multiplies the sample once per escaped particle.
inline LaplaceCheck laplace_check(const ExitSamples& s, double lambda, double target, double z_max = 3.0,
                                  double escape_factor = 1.0) {
    LaplaceCheck c;
    c.lambda = lambda;
    c.target = target;
    RunningStats lo, hi;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double v = std::isinf(lambda) ? (s.mass[i] == 0 ? 1.0 : 0.0) : std::exp(-lambda * s.mass[i]);
        if (!s.escaped.empty() && s.escaped[i]) v *= std::pow(escape_factor, static_cast<double>(s.escaped[i]));
        if (s.censored[i]) {
            lo.add(0.0);
            hi.add(v);
            ++c.n_censored;
        } else {
            lo.add(v);
            hi.add(v);
        }
    }
    c.n = s.size();
    c.lo = lo.mean();
    c.hi = hi.mean();
    // Binomial-type floor so a cell with no events still has a usable SE.
    const double p = std::clamp(target, 1.0 / (c.n + 1.0), 1.0 - 1.0 / (c.n + 1.0));
    c.se = std::max({lo.stderr_mean(), hi.stderr_mean(), std::isinf(lambda) ? std::sqrt(p * (1 - p) / c.n) : 0.0});
    const double gap = target < c.lo ? c.lo - target : (target > c.hi ? target - c.hi : 0.0);
    c.z = gap / c.se;
    c.pass = c.z <= z_max;
    return c;
}

// Least-squares slope of Y_{k+1} on Y_k over uncensored replicates.
inline Estimate martingale_slope(const HalfspacePaths& p, std::size_t k) {
    if (k + 1 >= p.r_grid.size()) throw input_error("martingale_slope: need a following level");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < p.Y.size(); ++i)
        if (p.censored_at[i] < 0) {
            x.push_back(p.Y[i][k]);
            y.push_back(p.Y[i][k + 1]);
        }
    const std::size_t n = x.size();
    if (n < 3) throw input_error("martingale_slope: too few samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxy / sxx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - my - b * (x[i] - mx);
        sse += e * e;
    }
    // Heteroscedastic (White) standard error: the conditional variance of
    // Y_{k+1} grows with Y_k.
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - my - b * (x[i] - mx);
        w += (x[i] - mx) * (x[i] - mx) * e * e;
    }
    (void)sse;
    return {b, std::sqrt(w) / sxx, n};
}

}  // namespace sbm
