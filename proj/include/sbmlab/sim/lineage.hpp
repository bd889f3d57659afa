#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <vector>

#include "sbmlab/core/rng.hpp"
#include "sbmlab/sim/config.hpp"
#include "sbmlab/sim/occupation.hpp"

namespace sbm {

// Event-driven simulation of the same particle system as `step`, without time
// discretization: each particle lives an Exp(N) time, moves as Brownian motion
// and then dies or splits in two.  Lineages are explored depth first, so the
// memory footprint is the depth of the tree rather than the population size.
//
// Surface crossings between events are detected with the Brownian bridge
// crossing probability: exact for half-spaces, tangent-plane approximation on
// adaptive sub-steps near spheres.

struct LineageOptions {
    OccupationGrid* sink = nullptr;
    bool stop_on_survivor = false;  // abort once any particle reaches the horizon
    bool keep_survivors = false;    // store positions alive at the horizon
    bool keep_frozen = true;        // store frozen positions, not just masses
    // Polled every 4096 events; returning true stops the replicate early.
    std::function<bool()> abort_when;
};

struct LineageResult {
    std::vector<double> frozen_mass;  // per surface
    std::vector<FrozenRecord> frozen;
    std::vector<Pos> survivors;
    std::uint64_t n_survivors = 0;
    std::uint64_t events = 0;
    double occupation = 0;  // total mass-time
    bool censored = false;  // hit the event cap
    bool aborted = false;   // stop_on_survivor or abort_when fired
    double alive_mass_at_stop = 0;
};

class LineageEngine {
public:
    LineageEngine(const SimConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {
        cfg_.validate(false);
        for (const auto& s : cfg_.surfaces)
            if (s.kind == Surface::Kind::sphere) has_sphere_ = true;
    }

    LineageResult run(const LineageOptions& opt = {}) {
        std::vector<Node> roots;
        for (const auto& a : cfg_.initial) {
            const auto k = static_cast<std::size_t>(std::llround(a.mass * cfg_.N));
            for (std::size_t i = 0; i < k; ++i) roots.push_back({a.x, 0.0});
        }
        return run_from(roots, opt);
    }

    struct Node {
        Pos x;
        double t;
    };

    LineageResult run_from(const std::vector<Node>& roots, const LineageOptions& opt = {}) {
        LineageResult res;
        res.frozen_mass.assign(cfg_.surfaces.size(), 0.0);
        const double m = 1.0 / cfg_.N;
        const int d = cfg_.d;
        stack_.assign(roots.rbegin(), roots.rend());
        opt_ = &opt;
        occ_ = 0;
        // Positions cannot influence the outcome without surfaces or a sink.
        const bool moves = !cfg_.surfaces.empty() || opt.sink || opt.keep_survivors || opt.abort_when;
        if (!moves) return run_times_only(roots, opt);
        while (!stack_.empty()) {
            if (res.events >= cfg_.cap) {
                res.censored = true;
                break;
            }
            if (opt.abort_when && (res.events & 4095u) == 0 && opt.abort_when()) {
                res.aborted = true;
                break;
            }
            Node n = stack_.back();
            stack_.pop_back();
            ++res.events;
            double life = expo_(rng_) / cfg_.N;
            bool reaches = false;
            if (n.t + life >= cfg_.horizon) {
                life = cfg_.horizon - n.t;
                reaches = true;
            }
            double used = life;
            int hit = -1;
            if (moves) hit = advance(n.x, life, used, d, m);
            else occ_ += life * m;
            if (hit >= 0) {
                res.frozen_mass[hit] += m;
                if (opt.keep_frozen) res.frozen.push_back({hit, n.x, m, n.t + used});
                continue;
            }
            if (reaches) {
                ++res.n_survivors;
                if (opt.keep_survivors) res.survivors.push_back(n.x);
                if (opt.stop_on_survivor) {
                    res.aborted = true;
                    break;
                }
                continue;
            }
            if (rng_() >> 63) {
                const double t = n.t + life;
                stack_.push_back({n.x, t});
                stack_.push_back({n.x, t});
            }
        }
        res.alive_mass_at_stop = m * static_cast<double>(stack_.size() + (res.aborted && opt_->stop_on_survivor ? 1 : 0));
        res.occupation = occ_;
        stack_.clear();
        return res;
    }

private:
    // Same process with positions dropped; only birth and death times matter.
    LineageResult run_times_only(const std::vector<Node>& roots, const LineageOptions& opt) {
        LineageResult res;
        res.frozen_mass.assign(cfg_.surfaces.size(), 0.0);
        const double m = 1.0 / cfg_.N;
        const double inv_n = 1.0 / cfg_.N;
        const double horizon = cfg_.horizon;
        std::vector<double> times;
        times.reserve(256);
        double occ = 0;
        for (auto it = roots.rbegin(); it != roots.rend(); ++it) times.push_back(it->t);
        while (!times.empty()) {
            if (res.events >= cfg_.cap) {
                res.censored = true;
                break;
            }
            const double t = times.back();
            times.pop_back();
            ++res.events;
            const double life = expo_(rng_) * inv_n;
            if (t + life >= horizon) {
                occ += (horizon - t) * m;
                ++res.n_survivors;
                if (opt.stop_on_survivor) {
                    res.aborted = true;
                    break;
                }
                continue;
            }
            occ += life * m;
            if (rng_() >> 63) {
                times.push_back(t + life);
                times.push_back(t + life);
            }
        }
        res.alive_mass_at_stop = m * static_cast<double>(times.size() + (res.aborted ? 1 : 0));
        res.occupation = occ;
        return res;
    }

    double normal() { return gauss_(rng_); }

    // Moves x by Brownian motion for time tau.  Returns the index of the
    // surface hit first (x is then the crossing point and `used` the time
    // elapsed) or -1.
    int advance(Pos& x, double tau, double& used, int d, double m) {
        used = 0;
        double rem = tau;
        while (rem > 0) {
            double h = rem;
            if (has_sphere_) {
                for (const auto& s : cfg_.surfaces) {
                    if (s.kind != Surface::Kind::sphere) continue;
                    const double a = s.gap(x, d);
                    if (a * a < 16 * h) {
                        const double c = a < 0.1 * s.radius ? cfg_.sphere_substep_near : cfg_.sphere_substep;
                        h = std::max(c * a * a, 1e-8 * s.radius * s.radius);
                    }
                }
                h = std::min(h, rem);
            }
            if (opt_->sink && cfg_.occupation_substep > 0) h = std::min(h, cfg_.occupation_substep);
            const double sd = std::sqrt(h);
            Pos y = x;
            for (int i = 0; i < d; ++i) y[i] += sd * normal();
            for (std::size_t k = 0; k < cfg_.surfaces.size(); ++k) {
                const Surface& s = cfg_.surfaces[k];
                const double a = s.gap(x, d);
                const double b = s.gap(y, d);
                double frac = -1;
                if (b <= 0) {
                    frac = a / (a - b);
                } else {
                    const double e = 2 * a * b / h;
                    if (e < 40 && rng_.uniform() < std::exp(-e)) frac = rng_.uniform();
                }
                if (frac >= 0) {
                    Pos z = x;
                    for (int i = 0; i < d; ++i) z[i] = x[i] + frac * (y[i] - x[i]);
                    deposit(x, z, frac * h * m);
                    x = s.project(z, d);
                    used += frac * h;
                    return static_cast<int>(k);
                }
            }
            deposit(x, y, h * m);
            x = y;
            rem -= h;
            used += h;
        }
        return -1;
    }

    void deposit(const Pos& a, const Pos& b, double amount) {
        occ_ += amount;
        if (opt_->sink) opt_->sink->deposit_segment(a, b, amount);
    }

    SimConfig cfg_;
    Rng& rng_;
    bool has_sphere_ = false;
    boost::random::normal_distribution<double> gauss_;
    boost::random::exponential_distribution<double> expo_;
    std::vector<Node> stack_;
    const LineageOptions* opt_ = nullptr;
    double occ_ = 0;
};

}  // namespace sbm
