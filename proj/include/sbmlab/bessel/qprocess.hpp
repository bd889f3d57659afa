#pragma once

// The squared-Bessel process with the extra inward drift
//   dY = 2 sqrt(Y) dW + [(2 + 2 nu) - 2 (p - 2) Y^{-q}] dt,  q = (p - 2)/2,
// stopped at 1: hitting probabilities from its scale function, a Monte Carlo
// cross-check, and the occupation bounds for int Y^{-gamma}.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sbmlab/bessel/bessel.hpp"

namespace sbm {

struct QProcessParams {
    double nu = 0;
    double p = 0;
    double q() const { return (p - 2) / 2; }
};

// int_x^inf y^{-1-nu} exp(-2 y^{1-p/2}) dy.
inline double q_scale_tail(const QProcessParams& qp, double x) {
    const double nu = qp.nu, e = 1 - qp.p / 2;
    auto f = [&](double y) { return std::pow(y, -1 - nu) * std::exp(-2 * std::pow(y, e)); };
    // Split [x, inf) at 16x; beyond, map y = 16x / u^(1/nu) to keep the
    // integrand bounded on (0, 1].
    double err = 0;
    const double head = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x, 16 * x, 12, 1e-13, &err);
    const double b = 16 * x;
    auto g = [&](double u) {
        if (u <= 0) return 0.0;
        const double y = b * std::pow(u, -1 / nu);
        // dy = (b / nu) u^{-1/nu - 1} du; y^{-1-nu} dy = b^{-nu} / nu du.
        return std::pow(b, -nu) / nu * std::exp(-2 * std::pow(y, e));
    };
    const double tail = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 12, 1e-13, &err);
    return head + tail;
}

inline double q_hitting_quadrature(const QProcessParams& qp, double x0, double a) {
    if (!(a >= 1)) throw domain_error("q-process: level a must be >= 1 (process is stopped at 1)");
    if (!(x0 >= a)) throw domain_error("q-process: need a <= x0");
    if (x0 == a) return 1.0;
    return q_scale_tail(qp, x0) / q_scale_tail(qp, a);
}

inline double q_hitting_bound(const QProcessParams& qp, double x0, double a) {
    return std::exp(2.0) * std::pow(a / x0, qp.nu);
}

struct QPath {
    bool hit = false;
    bool escaped = false;
    double y = 0;
    double occupation = 0;  // int_0^{tau_a} Y^{-gamma} dt
};

struct QSimOptions {
    double kappa = 0.004;
    double kappa_far = 0.02;
    double escape_factor = 2500;  // in Y units, relative to x0
    double gamma = 0;             // exponent for the occupation functional, 0 = off
};

// Exact squared-Bessel step for the (2 + 2 nu) part, explicit Euler for the
// bounded extra drift, bridge correction at the barrier.
inline QPath simulate_q_process(const QProcessParams& qp, double x0, double a, const QSimOptions& o, Rng& g) {
    const double delta = 2 + 2 * qp.nu, q = qp.q();
    QPath path;
    double y = x0;
    if (y <= a) {
        path.hit = true;
        path.y = a;
        return path;
    }
    const double y_esc = o.escape_factor * x0;
    BesqSampler step(delta);
    for (;;) {
        const double h = (y < 4 * a ? o.kappa : o.kappa_far) * y;
        double yn = step(y, h, g) - 2 * (qp.p - 2) * std::pow(y, -q) * h;
        bool crossed = yn <= a;
        double frac = 1;
        if (crossed) {
            frac = (y - a) / (y - yn);
        } else if (g.uniform() < std::exp(-2 * (std::sqrt(y) - std::sqrt(a)) * (std::sqrt(yn) - std::sqrt(a)) / h)) {
            crossed = true;
            frac = 0.5;
        }
        if (o.gamma > 0) path.occupation += detail::power_integral(y, crossed ? a : yn, frac * h, o.gamma);
        if (crossed) {
            path.hit = true;
            path.y = a;
            return path;
        }
        y = yn;
        if (y > y_esc) {
            path.escaped = true;
            path.y = y;
            return path;
        }
    }
}

struct QHitting {
    PathFunctionalSample mc;
    double quadrature = 0;
    double bound = 0;
    double z = 0;
    bool bound_ok = false;
};

inline QHitting q_process_hitting(double x0, double a, double nu, double p, std::size_t n, std::uint64_t seed,
                                  unsigned workers = 1, double kappa = 0.004) {
    QProcessParams qp{nu, p};
    QHitting out;
    out.quadrature = q_hitting_quadrature(qp, x0, a);
    out.bound = q_hitting_bound(qp, x0, a);
    out.bound_ok = out.quadrature <= out.bound;
    QSimOptions o;
    o.kappa = kappa;
    std::vector<double> v(n);
    parallel_for(n, workers, [&](std::size_t i) {
        Rng g = Rng::stream(seed, i);
        const auto path = simulate_q_process(qp, x0, a, o, g);
        // Escaped paths: return probability from the scale function.
        v[i] = path.hit ? 1.0 : (path.escaped ? q_hitting_quadrature(qp, path.y, a) : 0.0);
    });
    out.mc = summarize(v, 1.0, "1(tau_a < inf)", "none");
    out.z = z_score(out.mc.estimate, out.mc.stderr_, out.quadrature);
    return out;
}

enum class OccupationRegime { steep, shallow, none };

struct OccupationBound {
    OccupationRegime regime = OccupationRegime::none;
    double value = std::numeric_limits<double>::infinity();
};

// Bound on Q_{x0}(int_0^{tau_a} Y^{-gamma} dt). The shallow regime uses the
// condition gamma + (p-2) a^{-(p-2)/2} < 1 + nu, which is what the Ito
// argument produces (the drift term is bounded using Y >= a).
inline OccupationBound q_occupation_bound(const QProcessParams& qp, double x0, double a, double gamma) {
    if (!(gamma > 1)) throw domain_error("occupation bound: need gamma > 1");
    if (!(a >= 1) || !(x0 >= a)) throw domain_error("occupation bound: need 1 <= a <= x0");
    OccupationBound b;
    const double nu = qp.nu;
    if (gamma > 1 + nu) {
        b.regime = OccupationRegime::steep;
        b.value = std::exp(2.0) / (2 * (gamma - 1 - nu) * (gamma - 1)) * std::pow(a, 1 + nu - gamma) / std::pow(x0, nu);
        return b;
    }
    const double slack = 1 + nu - gamma - (qp.p - 2) * std::pow(a, -qp.q());
    if (slack > 0) {
        b.regime = OccupationRegime::shallow;
        b.value = std::pow(x0, 1 - gamma) / (2 * slack * (gamma - 1));
    }
    return b;
}

struct OccupationCheck {
    PathFunctionalSample mc;
    OccupationBound bound;
    bool ok = false;
};

inline OccupationCheck q_occupation_check(double x0, double a, double nu, double p, double gamma, std::size_t n,
                                          std::uint64_t seed, unsigned workers = 1, double kappa = 0.004) {
    QProcessParams qp{nu, p};
    OccupationCheck out;
    out.bound = q_occupation_bound(qp, x0, a, gamma);
    QSimOptions o;
    o.kappa = kappa;
    o.gamma = gamma;
    std::vector<double> v(n);
    parallel_for(n, workers, [&](std::size_t i) {
        Rng g = Rng::stream(seed, i);
        const auto path = simulate_q_process(qp, x0, a, o, g);
        double val = path.occupation;
        // Remaining occupation after escape, from the squared-Bessel Green
        // function y^{1-gamma} / ((gamma-1)(delta - 2 gamma)) where finite.
        const double delta = 2 + 2 * nu;
        if (path.escaped) val += delta > 2 * gamma ? std::pow(path.y, 1 - gamma) / ((gamma - 1) * (delta - 2 * gamma)) : 0.0;
        v[i] = val;
    });
    out.mc = summarize(v, 1.0, "int Y^-gamma", "none");
    out.ok = out.bound.regime != OccupationRegime::none && out.mc.estimate - 3 * out.mc.stderr_ <= out.bound.value;
    return out;
}

}  // namespace sbm
