#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "sbmlab/core/error.hpp"
#include "sbmlab/sim/config.hpp"

namespace sbm {

struct EnergyResult {
    double value = 0;
    std::size_t coincident_pairs = 0;  // skipped
};

// sum over ordered pairs i != j of w_i w_j |x_i - x_j|^-beta.
inline EnergyResult energy_integral(const std::vector<Pos>& pts, const std::vector<double>& w, double beta, int d) {
    if (pts.size() != w.size()) throw input_error("energy_integral: weights and points differ in length");
    if (!(beta > 0)) throw domain_error("energy_integral: beta must be positive");
    EnergyResult r;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = dist(pts[i], pts[j], d);
            if (s == 0) {
                r.coincident_pairs += 2;
                continue;
            }
            r.value += 2 * w[i] * w[j] * std::pow(s, -beta);
        }
    return r;
}

struct CapacityResult {
    double energy = 0;    // minimal energy found over probability weightings
    double capacity = 0;  // 1 / energy
    std::vector<double> weights;
};

// Multiplicative-weights descent of the energy over probability vectors,
// a fixed number of steps.
inline CapacityResult capacity_proxy(const std::vector<Pos>& pts, double beta, int d, int steps = 200) {
    const std::size_t n = pts.size();
    if (n < 2) throw input_error("capacity_proxy: need at least two points");
    std::vector<double> K(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) {
                const double s = dist(pts[i], pts[j], d);
                K[i * n + j] = s > 0 ? std::pow(s, -beta) : 0.0;
            }
    std::vector<double> mu(n, 1.0 / n), g(n);
    auto potential = [&] {
        double e = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += K[i * n + j] * mu[j];
            g[i] = s;
            e += mu[i] * s;
        }
        return e;
    };
    CapacityResult best;
    best.energy = potential();
    best.weights = mu;
    for (int it = 0; it < steps; ++it) {
        const double gmax = *std::max_element(g.begin(), g.end());
        const double eta = 1.0 / std::max(gmax, 1e-300);
        double z = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mu[i] *= std::exp(-eta * g[i]);
            z += mu[i];
        }
        for (auto& m : mu) m /= z;
        const double e = potential();
        if (e < best.energy) {
            best.energy = e;
            best.weights = mu;
        }
    }
    best.capacity = 1.0 / best.energy;
    return best;
}

// Energy of the uniform probability measure on the unit circle:
// 2^-beta Gamma((1-beta)/2) / (sqrt(pi) Gamma(1-beta/2)), beta < 1.
inline double circle_energy_exact(double beta) {
    if (!(beta > 0 && beta < 1)) throw domain_error("circle_energy_exact: beta must lie in (0, 1)");
    return std::pow(2.0, -beta) * boost::math::tgamma((1 - beta) / 2) / (std::sqrt(M_PI) * boost::math::tgamma(1 - beta / 2));
}

}  // namespace sbm
