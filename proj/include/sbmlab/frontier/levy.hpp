#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sbmlab/core/error.hpp"

namespace sbm {

namespace detail {

// int_A^inf cos(u) u^-s du and int_A^inf sin(u) u^-s du by repeated
// integration by parts; the remainder after `depth` terms is O(A^-(s+depth)).
inline void oscillatory_tail(double A, double s, double& ic, double& is, int depth = 12) {
    // Coefficients of sin A and cos A in the two integrals, built from the
    // innermost (dropped) level outwards.
    double c_s = 0, c_c = 0;  // I_c(s + k) = c_s sin A + c_c cos A
    double s_s = 0, s_c = 0;  // I_s(s + k)
    for (int k = depth; k >= 0; --k) {
        const double sk = s + k;
        const double p = std::pow(A, -sk);
        // I_c(sk) = -sin A A^-sk + sk I_s(sk+1);  I_s(sk) = cos A A^-sk - sk I_c(sk+1)
        const double nc_s = -p + sk * s_s, nc_c = sk * s_c;
        const double ns_s = -sk * c_s, ns_c = p - sk * c_c;
        c_s = nc_s;
        c_c = nc_c;
        s_s = ns_s;
        s_c = ns_c;
    }
    ic = c_s * std::sin(A) + c_c * std::cos(A);
    is = s_s * std::sin(A) + s_c * std::cos(A);
}

}  // namespace detail

struct LevyPsi {
    double value = 0;
    double error = 0;
};

// psi(theta) = 2|theta|^beta int_0^inf (1 - cos u) u^(-1-beta) (max(log(|theta|/u), 1))^2 du
inline LevyPsi levy_psi(double theta, double beta, double tol = 1e-9) {
    if (!(beta > 0 && beta < 2)) throw domain_error("levy_psi: beta must lie in (0, 2)");
    if (theta == 0 || !std::isfinite(theta)) throw domain_error("levy_psi: theta must be finite and non-zero");
    const double th = std::abs(theta);
    auto weight = [&](double u) {
        const double l = std::log(th / u);
        return l > 1 ? l * l : 1.0;
    };
    auto integrand = [&](double u) {
        if (u <= 0) return 0.0;
        if (u < 1e-6) return 0.5 * std::pow(u, 1 - beta) * weight(u);
        const double one_minus_cos = 2 * std::sin(0.5 * u) * std::sin(0.5 * u);
        return one_minus_cos * std::pow(u, -1 - beta) * weight(u);
    };
    // Break points: the kink of the weight at |theta|/e, u = 1, u = |theta|,
    // then whole periods up to the tail.
    std::vector<double> pts = {0.0, th / M_E, 1.0, th};
    const double tail_start = std::max({th, 1.0, 200.0});
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<double> knots;
    for (double p : pts)
        if (p < tail_start) knots.push_back(p);
    for (double u = std::ceil(knots.back() / (2 * M_PI)) * 2 * M_PI; u < tail_start; u += 2 * M_PI)
        if (u > knots.back()) knots.push_back(u);
    knots.push_back(tail_start);
    LevyPsi r;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        double err = 0;
        double v;
        if (k == 0) {
            // u^(1-beta) log^2 behaviour at the origin
            boost::math::quadrature::tanh_sinh<double> ts;
            v = ts.integrate(integrand, knots[0], knots[1], tol * 1e-2, &err);
        } else {
            v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, knots[k], knots[k + 1], 15, tol * 1e-2, &err);
        }
        r.value += v;
        r.error += std::abs(err);
    }
    // Tail: weight is 1 beyond max(|theta|/e, ...), so the integrand is
    // u^(-1-beta) - cos(u) u^(-1-beta).
    double ic = 0, is = 0;
    detail::oscillatory_tail(tail_start, 1 + beta, ic, is);
    r.value += std::pow(tail_start, -beta) / beta - ic;
    r.value *= 2 * std::pow(th, beta);
    r.error *= 2 * std::pow(th, beta);
    if (!(r.error <= tol * r.value)) throw convergence_error("levy_psi: quadrature tolerance not met", {r.error});
    return r;
}

struct PsiSandwich {
    std::vector<double> theta, ratio;  // psi / (|theta|^beta (1 + log+(|theta|)^2))
    double c_lo = 0, c_hi = 0;
    double spread() const { return c_hi / c_lo; }
};

inline PsiSandwich psi_sandwich(double beta, double theta_min = 1e-3, double theta_max = 1e3, std::size_t n = 25) {
    PsiSandwich s;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = theta_min * std::pow(theta_max / theta_min, static_cast<double>(i) / (n - 1));
        const double lp = std::max(0.0, std::log(th));
        s.theta.push_back(th);
        s.ratio.push_back(levy_psi(th, beta).value / (std::pow(th, beta) * (1 + lp * lp)));
    }
    s.c_lo = *std::min_element(s.ratio.begin(), s.ratio.end());
    s.c_hi = *std::max_element(s.ratio.begin(), s.ratio.end());
    return s;
}

}  // namespace sbm
