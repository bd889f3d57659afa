#pragma once

#include <cmath>
#include <numbers>

#include "sbmlab/core/error.hpp"

namespace sbm {

struct ExponentTable {
    int d = 0;
    double p = 0;      // decay exponent of V_inf - V^lambda in |x|
    double alpha = 0;  // decay exponent in lambda
    double mu = 0;
    double nu = 0;
    double boundary_dim = 0;  // d + 2 - p
};

inline void check_dim(int d) {
    if (d < 1 || d > 3) throw domain_error("dimension must be 1, 2 or 3");
}

inline ExponentTable exponents(int d) {
    check_dim(d);
    ExponentTable e;
    e.d = d;
    e.mu = d / 2.0 - 1.0;
    e.nu = std::sqrt(e.mu * e.mu + 4.0 * (4 - d));
    e.p = e.mu + e.nu;
    e.alpha = (e.p - 2.0) / (4 - d);
    e.boundary_dim = d + 2.0 - e.p;
    return e;
}

// Unit sphere surface area |S^{d-1}|.
inline double sphere_area(int d) {
    check_dim(d);
    return d == 1 ? 2.0 : d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
}

inline double v_infinity(int d, double r) {
    check_dim(d);
    if (!(r > 0)) throw domain_error("v_infinity: r must be positive");
    return 2.0 * (4 - d) / (r * r);
}

// d = 1 solution with a point source of strength lambda at the origin.
inline double v_lambda_exact_d1(double lambda, double x) {
    if (!(lambda > 0)) throw domain_error("v_lambda_exact_d1: lambda must be positive");
    const double b = std::cbrt(12.0 / lambda);
    const double s = std::abs(x) + b;
    return 6.0 / (s * s);
}

// d = 1 exit solution on {x < r}: boundary value lambda at x = r.
inline double u_exit_exact_d1(double lambda, double dist) {
    if (!(dist >= 0)) throw domain_error("u_exit_exact_d1: distance must be non-negative");
    const double s = dist + (std::isinf(lambda) ? 0.0 : std::sqrt(6.0 / lambda));
    return 6.0 / (s * s);
}

}  // namespace sbm
