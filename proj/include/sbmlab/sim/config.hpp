#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"

namespace sbm {

using Pos = std::array<double, 3>;

inline double dist(const Pos& a, const Pos& b, int d) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

struct Surface {
    enum class Kind { sphere, halfspace };
    enum class Side { outside, inside };  // sphere: which side is the domain

    Kind kind = Kind::halfspace;
    Side side = Side::outside;
    Pos center{0, 0, 0};
    double radius = 0;
    int axis = 0;
    double level = 0;  // halfspace domain is {x[axis] < level}

    static Surface sphere(Pos c, double eps, Side s = Side::outside) {
        Surface f;
        f.kind = Kind::sphere;
        f.center = c;
        f.radius = eps;
        f.side = s;
        return f;
    }
    static Surface halfspace(double level, int axis = 0) {
        Surface f;
        f.kind = Kind::halfspace;
        f.level = level;
        f.axis = axis;
        return f;
    }

    // Distance to the surface measured into the domain; <= 0 means crossed.
    double gap(const Pos& x, int d) const {
        if (kind == Kind::halfspace) return level - x[axis];
        const double r = dist(x, center, d);
        return side == Side::outside ? r - radius : radius - r;
    }

    // Closest point on the surface.
    Pos project(const Pos& x, int d) const {
        Pos y = x;
        if (kind == Kind::halfspace) {
            y[axis] = level;
            return y;
        }
        double r = dist(x, center, d);
        if (r == 0) {
            y = center;
            y[0] += radius;
            return y;
        }
        for (int i = 0; i < d; ++i) y[i] = center[i] + (x[i] - center[i]) * radius / r;
        return y;
    }

    std::string describe() const {
        if (kind == Kind::halfspace) return "halfspace(x" + std::to_string(axis) + "<" + std::to_string(level) + ")";
        return std::string("sphere(eps=") + std::to_string(radius) + (side == Side::outside ? ",outside)" : ",inside)");
    }
};

struct Atom {
    Pos x{0, 0, 0};
    double mass = 1;
};

struct SimConfig {
    int d = 1;
    double N = 100;      // particles per unit mass; branching rate
    double dt = 1e-3;    // time step of the synchronous scheme
    std::vector<Atom> initial{Atom{}};
    double horizon = std::numeric_limits<double>::infinity();  // inf = run to extinction
    std::vector<Surface> surfaces;
    std::uint64_t master_seed = 1;
    std::uint64_t cap = 10000000;  // particle-steps (synchronous) or events (lineage) per replicate
    // Event-driven engine near spheres: sub-step variance as a fraction of
    // gap^2, and the smaller fraction used within 0.1*radius of the sphere.
    double sphere_substep = 1.0 / 16;
    double sphere_substep_near = 0.25;
    // Longest motion step while an occupation sink is attached; 0 = none.
    double occupation_substep = 0;

    void validate(bool synchronous) const {
        if (d < 1 || d > 3) throw domain_error("SimConfig: d must be 1, 2 or 3");
        if (!(N >= 1)) throw domain_error("SimConfig: N must be >= 1");
        if (synchronous && !(dt > 0 && dt * N <= 0.1 + 1e-12))
            throw domain_error("SimConfig: need dt > 0 and dt * N <= 0.1");
        if (!(horizon > 0)) throw domain_error("SimConfig: horizon must be positive");
        for (const auto& a : initial) {
            if (!(a.mass >= 0)) throw domain_error("SimConfig: negative atom mass");
            const double k = a.mass * N;
            if (std::abs(k - std::round(k)) > 1e-9) throw domain_error("SimConfig: atom mass * N must be an integer");
        }
        for (const auto& s : surfaces) {
            if (s.kind == Surface::Kind::sphere && !(s.radius > 0)) throw domain_error("SimConfig: sphere radius must be positive");
            if (s.kind == Surface::Kind::halfspace && (s.axis < 0 || s.axis >= d)) throw domain_error("SimConfig: bad halfspace axis");
        }
        if (!(sphere_substep > 0 && sphere_substep_near > 0)) throw domain_error("SimConfig: sub-step fractions must be positive");
        if (!(occupation_substep >= 0)) throw domain_error("SimConfig: occupation_substep must be non-negative");
        if (cap == 0) throw domain_error("SimConfig: cap must be positive");
    }

    std::size_t initial_particles() const {
        std::size_t n = 0;
        for (const auto& a : initial) n += static_cast<std::size_t>(std::llround(a.mass * N));
        return n;
    }
};

struct FrozenRecord {
    int surface = 0;
    Pos x{0, 0, 0};
    double mass = 0;
    double time = 0;
};

}  // namespace sbm
