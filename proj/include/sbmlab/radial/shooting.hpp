#pragma once

// Inward shooting for the radial equation u'' + (d-1)/r u' = u^2 on the
// far-field family u ~ V_inf - A r^{-p}. Every radial problem in this
// library (point source, exit from a ball) is a member of that family, so
// one integrator and one parameter A cover them all.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/radau.hpp"
#include "sbmlab/radial/exponents.hpp"

namespace sbm {

// The equation in s = log r with state (u, r u').
struct RadialLogOde {
    int d;
    void f(double s, const Vec<2>& y, Vec<2>& dy) const {
        const double e2 = std::exp(2 * s);
        dy[0] = y[1];
        dy[1] = (2 - d) * y[1] + e2 * y[0] * y[0];
    }
    void jac(double s, const Vec<2>& y, Mat<2>& J) const {
        const double e2 = std::exp(2 * s);
        J[0][0] = 0;
        J[0][1] = 1;
        J[1][0] = 2 * e2 * y[0];
        J[1][1] = 2 - d;
    }
};

class FarField {
public:
    explicit FarField(int d) : d_(d), ex_(exponents(d)) {
        const double q = 2 * ex_.p - 2;
        den_ = q * (q + 2 - d) - 4.0 * (4 - d);
    }

    // Radius beyond which the two-term expansion is accurate to ~1e-4 in
    // the correction; errors there only shift A.
    double start_radius(double A, double floor_r) const {
        const double need = std::pow(1e4 * std::abs(A) / std::abs(den_), 1.0 / (ex_.p - 2));
        return std::max({floor_r, need, 1.0});
    }

    // (u, r u') at radius R.
    Vec<2> state(double A, double R) const {
        const double p = ex_.p, q = 2 * p - 2;
        const double k = -A * A / den_;
        const double vinf = 2.0 * (4 - d_) / (R * R);
        const double t1 = A * std::pow(R, -p), t2 = k * std::pow(R, -q);
        return {vinf - t1 - t2, -2 * vinf + p * t1 + q * t2};
    }

    const ExponentTable& table() const { return ex_; }

private:
    int d_;
    ExponentTable ex_;
    double den_;
};

enum class InwardStatus { ok, blowup, nonpositive };

struct InwardRun {
    InwardStatus status = InwardStatus::ok;
    double r_stop = 0;              // where integration halted if not ok
    std::vector<Vec<2>> states;     // (u, r u') at each reached target
};

struct ShootingOptions {
    double rtol = 1e-11;
    double atol = 1e-300;
};

// Integrate from the far field inward through `targets` (strictly
// decreasing radii). Stops early if u exceeds `blowup_level` or drops to 0.
inline InwardRun integrate_inward(int d, double A, double far_floor, const std::vector<double>& targets,
                                  double blowup_level = std::numeric_limits<double>::infinity(),
                                  const ShootingOptions& so = {}) {
    if (targets.empty()) throw domain_error("integrate_inward: no targets");
    FarField ff(d);
    const double R = ff.start_radius(A, std::max(far_floor, targets.front() * 1.0000001));
    Vec<2> y = ff.state(A, R);
    RadialLogOde ode{d};
    OdeOptions opt;
    opt.rtol = so.rtol;
    opt.atol = so.atol;
    opt.h_init = 1e-2;
    opt.h_max = 0.25;
    RadauIntegrator<2, RadialLogOde> integ(ode, opt);
    double s = std::log(R);
    InwardRun run;
    InwardStatus why = InwardStatus::ok;
    auto stop = [&](double, const Vec<2>& v) {
        if (v[0] > blowup_level) why = InwardStatus::blowup;
        else if (v[0] <= 0) why = InwardStatus::nonpositive;
        return why != InwardStatus::ok;
    };
    for (double rt : targets) {
        const OdeStatus st = integ.advance(s, y, std::log(rt), stop);
        if (st == OdeStatus::stopped) {
            run.status = why;
            run.r_stop = std::exp(s);
            return run;
        }
        if (st != OdeStatus::reached) {
            // Step-size collapse on the way in means a singularity.
            if (y[0] > 0) {
                run.status = InwardStatus::blowup;
                run.r_stop = std::exp(s);
                return run;
            }
            throw convergence_error("radial integration failed", {A, std::exp(s), y[0], y[1]});
        }
        run.states.push_back(y);
    }
    return run;
}

// Leading-order blow-up expansion of the exit solution at the sphere
// |x| = eps: u = 6/s^2 + c1/s + c2 + c3 s + O(s^2), s = r - eps.
inline double blowup_asymptote(int d, double eps, double r) {
    const double s = r - eps;
    const double k = (d - 1) / eps;
    const double c1 = -1.2 * k;
    const double c2 = (k * (12 / eps - c1) - c1 * c1) / 12;
    const double c3 = (k * (-12 / (eps * eps) + c1 / eps) - 2 * c1 * c2) / 12;
    return 6 / (s * s) + c1 / s + c2 + c3 * s;
}

}  // namespace sbm
