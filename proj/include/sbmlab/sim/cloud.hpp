#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/error.hpp"
#include "sbmlab/core/rng.hpp"
#include "sbmlab/sim/config.hpp"
#include "sbmlab/sim/occupation.hpp"

namespace sbm {

struct ParticleCloud {
    double time = 0;
    double mass = 0.01;  // per particle, 1/N
    std::vector<Pos> alive;
    std::vector<FrozenRecord> frozen;
    std::uint64_t particle_steps = 0;

    double alive_mass() const { return mass * static_cast<double>(alive.size()); }
    double frozen_mass() const {
        double s = 0;
        for (const auto& f : frozen) s += f.mass;
        return s;
    }
    double total_mass() const { return alive_mass() + frozen_mass(); }
    bool extinct() const { return alive.empty(); }
};

inline ParticleCloud make_cloud(const SimConfig& cfg) {
    cfg.validate(true);
    ParticleCloud c;
    c.mass = 1.0 / cfg.N;
    for (const auto& a : cfg.initial) {
        const auto k = static_cast<std::size_t>(std::llround(a.mass * cfg.N));
        c.alive.insert(c.alive.end(), k, a.x);
    }
    return c;
}

// One step of the synchronous scheme: Gaussian move of variance dt per
// coordinate, freezing at the linear interpolation of the crossing, then
// binary branching with probability N*dt.  Mass-time of the step is added to
// `sink` along each particle's segment.
inline void step(ParticleCloud& c, const SimConfig& cfg, Rng& rng, OccupationGrid* sink = nullptr) {
    const int d = cfg.d;
    const double dt = cfg.dt;
    const double sd = std::sqrt(dt);
    const double pb = cfg.N * dt;
    boost::random::normal_distribution<double> gauss;
    std::vector<Pos> next;
    next.reserve(c.alive.size() + c.alive.size() / 8 + 8);
    c.particle_steps += c.alive.size();
    if (c.particle_steps > cfg.cap)
        throw resource_error("particle cap exceeded (" + std::to_string(cfg.cap) + " particle-steps); lower N or the horizon");
    for (const Pos& x : c.alive) {
        Pos y = x;
        for (int i = 0; i < d; ++i) y[i] += sd * gauss(rng);
        bool froze = false;
        for (std::size_t k = 0; k < cfg.surfaces.size() && !froze; ++k) {
            const Surface& s = cfg.surfaces[k];
            const double a = s.gap(x, d);
            const double b = s.gap(y, d);
            if (b > 0) continue;
            const double frac = a > 0 ? a / (a - b) : 0.0;
            Pos z = x;
            for (int i = 0; i < d; ++i) z[i] += frac * (y[i] - x[i]);
            if (sink) sink->deposit_segment(x, z, c.mass * frac * dt);
            c.frozen.push_back({static_cast<int>(k), s.project(z, d), c.mass, c.time + frac * dt});
            froze = true;
        }
        if (froze) continue;
        if (sink) sink->deposit_segment(x, y, c.mass * dt);
        if (rng.uniform() < pb) {
            if (rng() >> 63) {
                next.push_back(y);
                next.push_back(y);
            }
        } else {
            next.push_back(y);
        }
    }
    c.alive.swap(next);
    c.time += dt;
}

// Steps until the horizon, extinction, or the cap.
inline void run_cloud(ParticleCloud& c, const SimConfig& cfg, Rng& rng, OccupationGrid* sink = nullptr) {
    while (!c.extinct() && c.time + 0.5 * cfg.dt < cfg.horizon) step(c, cfg, rng, sink);
}

// Extinction probability of the synchronous scheme after k steps, from the
// per-step offspring generating function f(s) = (1-p)s + p/2 + (p/2)s^2.
inline double step_extinction_prob(double N, double dt, std::size_t k, double n0) {
    const double p = N * dt;
    double q = 0;
    for (std::size_t i = 0; i < k; ++i) q = (1 - p) * q + 0.5 * p + 0.5 * p * q * q;
    return std::pow(q, n0);
}

// Binary checkpoint.  Layout (little endian, native doubles):
//   char[8] "SBMCKPT1", uint32 version, int32 d, double time, double mass,
//   uint64 particle_steps, uint64 rng[4], uint64 n_alive, n_alive*3 doubles,
//   uint64 n_frozen, n_frozen*(int32 surface, 3 doubles x, double mass, double time).
constexpr char kCheckpointMagic[8] = {'S', 'B', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
template <class T>
void put(std::ostream& o, const T& v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& i) {
    T v{};
    i.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!i) throw input_error("checkpoint: truncated file");
    return v;
}
}  // namespace detail

inline void save_checkpoint(const std::string& path, const ParticleCloud& c, int d, const Rng& rng) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw input_error("checkpoint: cannot write " + path);
    o.write(kCheckpointMagic, 8);
    detail::put(o, kCheckpointVersion);
    detail::put(o, static_cast<std::int32_t>(d));
    detail::put(o, c.time);
    detail::put(o, c.mass);
    detail::put(o, c.particle_steps);
    for (int i = 0; i < 4; ++i) detail::put(o, rng.state()[i]);
    detail::put(o, static_cast<std::uint64_t>(c.alive.size()));
    for (const auto& x : c.alive)
        for (int i = 0; i < 3; ++i) detail::put(o, x[i]);
    detail::put(o, static_cast<std::uint64_t>(c.frozen.size()));
    for (const auto& f : c.frozen) {
        detail::put(o, static_cast<std::int32_t>(f.surface));
        for (int i = 0; i < 3; ++i) detail::put(o, f.x[i]);
        detail::put(o, f.mass);
        detail::put(o, f.time);
    }
}

struct Checkpoint {
    int d = 1;
    ParticleCloud cloud;
    Rng rng;
};

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw input_error("checkpoint: bad magic in " + path);
    const auto version = detail::get<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw input_error("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ck;
    ck.d = detail::get<std::int32_t>(in);
    ck.cloud.time = detail::get<double>(in);
    ck.cloud.mass = detail::get<double>(in);
    ck.cloud.particle_steps = detail::get<std::uint64_t>(in);
    std::uint64_t st[4];
    for (auto& w : st) w = detail::get<std::uint64_t>(in);
    ck.rng.set_state(st);
    const auto na = detail::get<std::uint64_t>(in);
    ck.cloud.alive.resize(na);
    for (auto& x : ck.cloud.alive)
        for (int i = 0; i < 3; ++i) x[i] = detail::get<double>(in);
    const auto nf = detail::get<std::uint64_t>(in);
    ck.cloud.frozen.resize(nf);
    for (auto& f : ck.cloud.frozen) {
        f.surface = detail::get<std::int32_t>(in);
        for (int i = 0; i < 3; ++i) f.x[i] = detail::get<double>(in);
        f.mass = detail::get<double>(in);
        f.time = detail::get<double>(in);
    }
    return ck;
}

inline CsvTable frozen_to_csv(const std::vector<FrozenRecord>& frozen, int d) {
    CsvTable t({"surface", "x0", "x1", "x2", "mass", "time"});
    t.add_meta("d", std::to_string(d));
    for (const auto& f : frozen) t.row({fmt_num(f.surface), fmt_num(f.x[0]), fmt_num(f.x[1]), fmt_num(f.x[2]), fmt_num(f.mass), fmt_num(f.time)});
    return t;
}

inline CsvTable alive_to_csv(const ParticleCloud& c, int d) {
    CsvTable t({"x0", "x1", "x2"});
    t.add_meta("d", std::to_string(d));
    t.add_meta("time", fmt_num(c.time));
    t.add_meta("mass", fmt_num(c.mass));
    for (const auto& x : c.alive) t.row({fmt_num(x[0]), fmt_num(x[1]), fmt_num(x[2])});
    return t;
}

}  // namespace sbm
