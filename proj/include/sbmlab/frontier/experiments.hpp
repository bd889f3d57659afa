#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/parallel.hpp"
#include "sbmlab/frontier/field.hpp"
#include "sbmlab/frontier/frontier.hpp"
#include "sbmlab/sim/lineage.hpp"

namespace sbm {

// Local time estimates L^x ~ occupation(cell)/h^d at probe cells, one row
// per replicate.  A replicate stops early once every probe exceeds `a_stop`;
// the probes then hold lower bounds above a_stop, which is all the tail
// statistics need.
struct ProbeSamples {
    std::vector<Pos> probes;
    std::vector<std::vector<double>> L;  // L[rep][probe]
    std::vector<std::uint8_t> censored;
    std::vector<std::uint64_t> events;
    double h = 0;

    std::size_t n_censored() const { return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1)); }
};

// Grid with an odd number of cells per axis, so the origin and the points
// k*h on the axes are cell centres.
inline OccupationGrid probe_grid(int d, double reach, double h) {
    const int half = static_cast<int>(std::ceil(reach / h)) + 1;
    const int n = 2 * half + 1;
    Pos o{0, 0, 0};
    for (int i = 0; i < d; ++i) o[i] = -(half + 0.5) * h;
    return OccupationGrid(d, o, h, {n, d > 1 ? n : 1, d > 2 ? n : 1});
}

// Probes at distance x along every coordinate axis in both directions.
inline std::vector<Pos> axis_probes(int d, double x) {
    std::vector<Pos> out;
    for (int a = 0; a < d; ++a)
        for (int s = -1; s <= 1; s += 2) {
            Pos p{0, 0, 0};
            p[a] = s * x;
            out.push_back(p);
        }
    return out;
}

inline ProbeSamples run_local_time_probes(SimConfig cfg, const std::vector<Pos>& probes, double h, double a_stop,
                                          std::size_t n_reps, int workers = 0) {
    if (probes.empty()) throw input_error("run_local_time_probes: no probes");
    if (!(h > 0)) throw domain_error("run_local_time_probes: h must be positive");
    cfg.validate(false);
    double reach = 0;
    for (const auto& p : probes)
        for (int i = 0; i < cfg.d; ++i) reach = std::max(reach, std::abs(p[i]));
    const OccupationGrid proto = probe_grid(cfg.d, reach, h);
    std::vector<std::size_t> idx;
    for (const auto& p : probes) {
        const long long k = proto.index_of(p);
        if (k < 0) throw input_error("run_local_time_probes: probe outside grid");
        idx.push_back(static_cast<std::size_t>(k));
    }
    const double vol = std::pow(h, cfg.d);
    ProbeSamples out;
    out.probes = probes;
    out.h = h;
    out.L.assign(n_reps, std::vector<double>(probes.size(), 0.0));
    out.censored.assign(n_reps, 0);
    out.events.assign(n_reps, 0);
    parallel_for(n_reps, resolve_workers(workers), [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.master_seed, i);
        OccupationGrid g = proto;
        LineageOptions opt;
        opt.sink = &g;
        opt.keep_frozen = false;
        opt.abort_when = [&] {
            for (auto k : idx)
                if (!(g.cells()[k] / vol > a_stop)) return false;
            return true;
        };
        LineageEngine eng(cfg, rng);
        const auto r = eng.run(opt);
        for (std::size_t j = 0; j < idx.size(); ++j) out.L[i][j] = g.cells()[idx[j]] / vol;
        out.events[i] = r.events;
        // A capped replicate is only ambiguous if some probe is still <= a_stop.
        if (r.censored)
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (!(out.L[i][j] > a_stop)) out.censored[i] = 1;
    });
    return out;
}

// Per-replicate frontier of the d = 1 local-time field started from one atom
// at the origin.  tau <= 0 selects default_tau per replicate.
struct FrontierRun {
    std::vector<std::size_t> frontier_cells;
    std::vector<std::size_t> positive_cells;
    std::vector<std::uint8_t> censored;
    std::vector<double> outside;  // occupation that fell off the grid
    std::size_t count_equal(std::size_t k) const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < frontier_cells.size(); ++i)
            if (!censored[i] && frontier_cells[i] == k) ++c;
        return c;
    }
    std::size_t n_valid() const { return frontier_cells.size() - static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1)); }
};

inline FrontierRun run_frontier(SimConfig cfg, double half, double h, double tau, std::size_t n_reps, int workers = 0) {
    cfg.validate(false);
    const OccupationGrid proto = OccupationGrid::centered(cfg.d, half, h);
    FrontierRun out;
    out.frontier_cells.assign(n_reps, 0);
    out.positive_cells.assign(n_reps, 0);
    out.censored.assign(n_reps, 0);
    out.outside.assign(n_reps, 0);
    parallel_for(n_reps, resolve_workers(workers), [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.master_seed, i);
        OccupationGrid g = proto;
        LineageOptions opt;
        opt.sink = &g;
        opt.keep_frozen = false;
        LineageEngine eng(cfg, rng);
        const auto r = eng.run(opt);
        const auto f = build_field(g, cfg.N, i);
        const double t = tau > 0 ? tau : default_tau(f);
        out.frontier_cells[i] = extract_frontier(f, t).cells.size();
        out.positive_cells[i] = positive_set(f, t).cells.size();
        out.censored[i] = r.censored;
        out.outside[i] = g.outside();
    });
    return out;
}

}  // namespace sbm
