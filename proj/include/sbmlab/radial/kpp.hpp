#pragma once

// Travelling wave of 1/2 phi'' + 1/2 phi' + beta (phi^2 - phi) = 0 joining
// 0 (t -> -inf) to 1 (t -> +inf), normalised by phi(0) = 1/2.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/fit.hpp"
#include "sbmlab/core/radau.hpp"
#include "sbmlab/core/roots.hpp"

namespace sbm {

struct KppWave {
    double beta = 0;
    std::vector<double> t, phi;
    std::vector<double> one_minus_phi;  // kept separately: 1 - phi loses digits in the tail
    ExponentFit tail_rate;              // decay rate of 1 - phi
    int poly_order = 0;                 // power of t multiplying the exponential
    double growth_rate = 0;             // rate of phi at -inf
};

namespace detail {

struct KppOde {  // state (phi, phi')
    double beta;
    void f(double, const Vec<2>& y, Vec<2>& d) const {
        d[0] = y[1];
        d[1] = -y[1] + 2 * beta * y[0] * (1 - y[0]);
    }
    void jac(double, const Vec<2>& y, Mat<2>& J) const {
        J[0][0] = 0;
        J[0][1] = 1;
        J[1][0] = 2 * beta * (1 - 2 * y[0]);
        J[1][1] = -1;
    }
};

struct KppTailOde {  // state (w, w') with w = 1 - phi
    double beta;
    void f(double, const Vec<2>& y, Vec<2>& d) const {
        d[0] = y[1];
        d[1] = -y[1] - 2 * beta * y[0] * (1 - y[0]);
    }
    void jac(double, const Vec<2>& y, Mat<2>& J) const {
        J[0][0] = 0;
        J[0][1] = 1;
        J[1][0] = -2 * beta * (1 - 2 * y[0]);
        J[1][1] = -1;
    }
};

}  // namespace detail

inline KppWave kpp_wave(double beta, double t_min, double t_max, std::size_t n, double fit_lo = 20,
                        double fit_hi = 50) {
    if (!(beta > 0) || beta > 0.125 + 1e-15) throw domain_error("kpp_wave: need 0 < beta <= 1/8");
    if (!(t_max > t_min) || n < 2) throw domain_error("kpp_wave: bad grid");
    if (!(fit_hi > fit_lo) || fit_lo < t_min || fit_hi > t_max) throw domain_error("kpp_wave: fit window outside grid");
    KppWave w;
    w.beta = beta;
    const double lp = (-1 + std::sqrt(1 + 8 * beta)) / 2;
    w.growth_rate = lp;
    const double disc = 1 - 8 * beta;
    w.poly_order = std::abs(disc) < 1e-12 ? 1 : 0;

    // Start on the unstable manifold of 0 with a second-order correction.
    const double delta = 1e-10;
    const double c2 = -beta / (2 * lp * lp + lp - beta);
    const Vec<2> y0 = {delta + c2 * delta * delta, lp * delta + 2 * lp * c2 * delta * delta};
    detail::KppOde ode{beta};
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-300;
    opt.h_init = 1e-2;
    opt.h_max = 0.5;

    // Locate the crossing phi = 1/2 in the manifold time.
    double t = 0;
    Vec<2> y = y0;
    double t_prev = 0;
    Vec<2> y_prev = y0;
    {
        RadauIntegrator<2, detail::KppOde> integ(ode, opt);
        while (y[0] < 0.5) {
            t_prev = t;
            y_prev = y;
            if (integ.advance(t, y, t + 1.0) != OdeStatus::reached) throw convergence_error("kpp_wave: integration failed");
            if (t > 1e4) throw convergence_error("kpp_wave: never reached 1/2");
        }
    }
    auto g = [&](double tt) {
        RadauIntegrator<2, detail::KppOde> integ(ode, opt);
        double s = t_prev;
        Vec<2> v = y_prev;
        integ.advance(s, v, tt);
        return v[0] - 0.5;
    };
    const double t_half = solve_bracketed(g, t_prev, y_prev[0] - 0.5, t, y[0] - 0.5, 1e-14 * t, 1e-15).x;
    if (t_min + t_half < 0) throw domain_error("kpp_wave: t_min reaches past the manifold start");

    w.t.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.t[i] = t_min + (t_max - t_min) * i / (n - 1.0);
    // Put 0 on the grid when it falls inside, so phi(0) = 1/2 is tabulated.
    w.phi.resize(n);
    w.one_minus_phi.resize(n);

    RadauIntegrator<2, detail::KppOde> head(ode, opt);
    double s = 0;
    Vec<2> v = y0;
    std::size_t i = 0;
    for (; i < n && w.t[i] <= 0; ++i) {
        head.advance(s, v, t_half + w.t[i]);
        w.phi[i] = v[0];
        w.one_minus_phi[i] = 1 - v[0];
    }
    head.advance(s, v, t_half);
    detail::KppTailOde tail_ode{beta};
    RadauIntegrator<2, detail::KppTailOde> tail(tail_ode, opt);
    Vec<2> u = {1 - v[0], -v[1]};
    double st = 0;
    for (; i < n; ++i) {
        if (tail.advance(st, u, w.t[i]) != OdeStatus::reached) throw convergence_error("kpp_wave: tail integration failed");
        w.phi[i] = 1 - u[0];
        w.one_minus_phi[i] = u[0];
    }

    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < n; ++k) {
        if (w.t[k] < fit_lo || w.t[k] > fit_hi || !(w.one_minus_phi[k] > 0)) continue;
        xs.push_back(w.t[k]);
        ys.push_back(std::log(w.one_minus_phi[k]) - w.poly_order * std::log(w.t[k]));
    }
    if (xs.size() < 4) throw convergence_error("kpp_wave: fit window holds fewer than 4 points");
    w.tail_rate = ols(xs, ys, "kpp_tail_rate");
    w.tail_rate.estimate = -w.tail_rate.estimate;
    return w;
}

}  // namespace sbm
