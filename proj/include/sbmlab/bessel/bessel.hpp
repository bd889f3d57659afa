#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/parallel.hpp"
#include "sbmlab/core/rng.hpp"
#include "sbmlab/core/stats.hpp"

namespace sbm {

struct BesselSpec {
    double nu = 0;               // index; dimension delta = 2 + 2 nu
    double r = 1;                // start
    double R = 0;                // absorbing level, 0 = none
    double kappa = 0.004;        // time step = kappa * rho^2 near the barrier
    double kappa_far = 0.02;     // ... and once rho > 2 R (or everywhere when R = 0)
    double escape_factor = 50;   // stop once rho > escape_factor * r
    double horizon = std::numeric_limits<double>::infinity();
    double q = 2;                // exponent of the extra additive functional int rho^{-q}
    double dimension() const { return 2 + 2 * nu; }
};

struct PathFunctionalSample {
    std::size_t n_paths = 0;
    double estimate = 0;
    double stderr_ = 0;
    std::string functional;
    std::string conditioning;
};

inline void check_bessel_spec(const BesselSpec& s) {
    if (!(s.nu >= -0.5)) throw domain_error("Bessel index must be >= -1/2");
    if (!(s.r > 0)) throw domain_error("Bessel start must be positive");
    if (!(s.R >= 0)) throw domain_error("absorbing level must be >= 0");
    if (!(s.kappa > 0 && s.kappa < 0.5) || !(s.kappa_far > 0 && s.kappa_far < 0.5))
        throw domain_error("step fractions must lie in (0, 0.5)");
}

// Exact transition of the squared Bessel process of dimension delta >= 1:
// Y_{t+h} = h * noncentral chi^2(delta, y/h) = h * ((Z + sqrt(y/h))^2 + chi^2_{delta-1}).
class BesqSampler {
public:
    explicit BesqSampler(double delta) : delta_(delta), gamma_(delta > 1 ? (delta - 1) / 2 : 1.0, 1.0) {
        if (!(delta >= 1)) throw domain_error("squared Bessel sampler needs dimension >= 1");
    }
    double operator()(double y, double h, Rng& g) {
        const double z = normal_(g) + std::sqrt(y / h);
        double chi = z * z;
        if (delta_ > 1) chi += 2 * gamma_(g);
        return h * chi;
    }
    double dimension() const { return delta_; }

private:
    double delta_;
    boost::random::gamma_distribution<double> gamma_;
    boost::random::normal_distribution<double> normal_;
};

inline double besq_step(double y, double delta, double h, Rng& g) {
    BesqSampler s(delta);
    return s(y, h, g);
}

struct BesselPath {
    bool hit = false;      // reached R
    bool escaped = false;  // passed the escape radius
    double rho = 0;        // rho at the stopping time
    double t = 0;          // elapsed time
    double h2 = 0;         // int rho^{-2} ds
    double hq = 0;         // int rho^{-q} ds
};

namespace detail {

// int_0^h Y_s^{-e} ds given the endpoints, with log Y interpolated linearly
// plus the Brownian-bridge curvature term (variance of log Y is 4/Y per time).
inline double power_integral(double ya, double yb, double h, double e) {
    const double fa = std::pow(ya, -e), fb = std::pow(yb, -e);
    const double lr = std::log(fa / fb);
    const double base = std::abs(lr) < 1e-12 ? h * 0.5 * (fa + fb) : h * (fa - fb) / lr;
    const double yg = std::sqrt(ya * yb);
    return base * (1 + e * e * h / (3 * yg));
}

}  // namespace detail

// One path of the Bessel process stopped at min(tau_R, horizon, escape).
inline BesselPath simulate_bessel(const BesselSpec& s, Rng& g) {
    const double delta = s.dimension();
    const double YR = s.R * s.R;
    const double Yesc = std::pow(s.escape_factor * s.r, 2);
    BesselPath p;
    double y = s.r * s.r;
    if (s.R > 0 && s.r <= s.R) {
        p.hit = true;
        p.rho = s.r;
        return p;
    }
    BesqSampler step(delta);
    const double near = 4 * YR;
    while (p.t < s.horizon) {
        double h = (y < near ? s.kappa : std::max(s.kappa, s.kappa_far)) * y;
        const bool last = p.t + h >= s.horizon;
        if (last) h = s.horizon - p.t;
        const double yn = step(y, h, g);
        if (s.R > 0) {
            bool crossed = yn <= YR;
            double frac = 1.0;
            if (crossed) {
                frac = (y - YR) / (y - yn);
            } else {
                // rho = sqrt(Y) has unit volatility, so the bridge formula applies there.
                const double pc = std::exp(-2 * (std::sqrt(y) - s.R) * (std::sqrt(yn) - s.R) / h);
                if (pc > 0 && g.uniform() < pc) {
                    crossed = true;
                    frac = 0.5;
                }
            }
            if (crossed) {
                p.h2 += detail::power_integral(y, YR, frac * h, 1.0);
                p.hq += detail::power_integral(y, YR, frac * h, s.q / 2);
                p.t += frac * h;
                p.hit = true;
                p.rho = s.R;
                return p;
            }
        }
        p.h2 += detail::power_integral(y, yn, h, 1.0);
        p.hq += detail::power_integral(y, yn, h, s.q / 2);
        p.t = last ? s.horizon : p.t + h;
        y = yn;
        if (y > Yesc && std::isinf(s.horizon)) {
            p.escaped = true;
            break;
        }
        if (!(y > 0)) throw convergence_error("Bessel path reached 0");
    }
    p.rho = std::sqrt(y);
    return p;
}

inline double hitting_prob(double nu, double r, double R) {
    if (!(nu >= 0)) throw domain_error("hitting_prob: index must be >= 0");
    if (!(R > 0) || !(r > 0)) throw domain_error("hitting_prob: radii must be positive");
    if (R > r) throw domain_error("hitting_prob: need R <= r");
    return std::pow(R / r, 2 * nu);
}

inline PathFunctionalSample summarize(const std::vector<double>& v, double scale, std::string functional,
                                      std::string conditioning) {
    RunningStats st;
    for (double x : v) st.add(x);
    PathFunctionalSample out;
    out.n_paths = v.size();
    out.estimate = st.mean() * scale;
    out.stderr_ = st.stderr_mean() * scale;
    out.functional = std::move(functional);
    out.conditioning = std::move(conditioning);
    return out;
}

// Paths that escape are credited with the exact probability of returning.
inline PathFunctionalSample hitting_prob_mc(BesselSpec s, std::size_t n, std::uint64_t seed, unsigned workers = 1) {
    check_bessel_spec(s);
    hitting_prob(s.nu, s.r, s.R);
    std::vector<double> v(n);
    parallel_for(n, workers, [&](std::size_t i) {
        Rng g = Rng::stream(seed, i);
        const auto p = simulate_bessel(s, g);
        v[i] = p.hit ? 1.0 : (p.escaped ? hitting_prob(s.nu, p.rho, s.R) : 0.0);
    });
    return summarize(v, 1.0, "1(tau_R < inf)", "none");
}

enum class PhiKind { constant, hit_by_t, exp_neg_rho };

struct PhiDescriptor {
    PhiKind kind = PhiKind::constant;
    double c = 1;  // value for constant
    std::string name() const {
        switch (kind) {
            case PhiKind::constant: return "const";
            case PhiKind::hit_by_t: return "1(tau_R<=t)";
            case PhiKind::exp_neg_rho: return "exp(-rho_t)";
        }
        return "?";
    }
    double operator()(const BesselPath& p) const {
        switch (kind) {
            case PhiKind::constant: return c;
            case PhiKind::hit_by_t: return p.hit ? 1.0 : 0.0;
            case PhiKind::exp_neg_rho: return std::exp(-p.rho);
        }
        return 0;
    }
};

struct YorCheck {
    PathFunctionalSample lhs, rhs;
    double nu = 0;
    double z = 0;  // |lhs - rhs| / combined SE
};

// E^{(2+2mu)}_r[Phi exp(-lambda^2/2 int rho^{-2})] against
// r^{nu-mu} E^{(2+2nu)}_r[rho^{mu-nu} Phi], both at t ^ tau_R.
inline YorCheck yor_identity_check(double lambda, double mu, double r, double R, double t, PhiDescriptor phi,
                                   std::size_t n, std::uint64_t seed, unsigned workers = 1, double kappa = 0.004) {
    if (!(mu > -0.5)) throw domain_error("yor_identity_check: need mu > -1/2");
    if (!(lambda >= 0)) throw domain_error("yor_identity_check: need lambda >= 0");
    if (!(R < r) || !(R > 0)) throw domain_error("yor_identity_check: need 0 < R < r");
    if (!(t > 0) || !std::isfinite(t)) throw domain_error("yor_identity_check: need finite t > 0");
    YorCheck out;
    out.nu = std::sqrt(lambda * lambda + mu * mu);
    BesselSpec a;
    a.nu = mu;
    a.r = r;
    a.R = R;
    a.horizon = t;
    a.kappa = kappa;
    BesselSpec b = a;
    b.nu = out.nu;
    std::vector<double> va(n), vb(n);
    parallel_for(n, workers, [&](std::size_t i) {
        Rng g1 = Rng::stream(seed, 2 * i);
        const auto p = simulate_bessel(a, g1);
        va[i] = phi(p) * std::exp(-0.5 * lambda * lambda * p.h2);
        Rng g2 = Rng::stream(seed, 2 * i + 1);
        const auto q = simulate_bessel(b, g2);
        vb[i] = std::pow(r, out.nu - mu) * std::pow(q.rho, mu - out.nu) * phi(q);
    });
    out.lhs = summarize(va, 1.0, phi.name() + "*exp(-lambda^2/2 int rho^-2)", "none");
    out.rhs = summarize(vb, 1.0, "r^(nu-mu) rho^(mu-nu) " + phi.name(), "none");
    const double se = std::hypot(out.lhs.stderr_, out.rhs.stderr_);
    out.z = z_score(out.lhs.estimate, se, out.rhs.estimate);
    return out;
}

inline double exp_functional_exact(double nu, double gamma, double r) {
    if (!(2 * gamma <= nu * nu)) throw domain_error("exp functional: need 2 gamma <= nu^2");
    return std::pow(r, nu - std::sqrt(nu * nu - 2 * gamma));
}

namespace detail {

// E[exp(gamma int_0^{tau_1} rho^{-q}) | tau_1 < inf] by reweighting with the
// exact hitting probability r^{-2 nu}.
inline PathFunctionalSample conditioned_exp_functional(double nu, double gamma, double q, double r, std::size_t n,
                                                       std::uint64_t seed, unsigned workers, double kappa) {
    BesselSpec s;
    s.nu = nu;
    s.r = r;
    s.R = 1;
    s.q = q;
    s.kappa = kappa;
    check_bessel_spec(s);
    std::vector<double> v(n);
    parallel_for(n, workers, [&](std::size_t i) {
        Rng g = Rng::stream(seed, i);
        const auto p = simulate_bessel(s, g);
        const double w = std::exp(gamma * (q == 2 ? p.h2 : p.hq));
        v[i] = p.hit ? w : (p.escaped ? w * std::pow(p.rho, -2 * nu) : 0.0);
    });
    return summarize(v, std::pow(r, 2 * nu), "exp(gamma int rho^-" + std::to_string(q) + ")", "tau_1 < inf");
}

}  // namespace detail

inline PathFunctionalSample exp_functional_mc(double nu, double gamma, double r, std::size_t n, std::uint64_t seed,
                                              unsigned workers = 1, double kappa = 0.004) {
    exp_functional_exact(nu, gamma, r);
    if (!(gamma > 0)) throw domain_error("exp_functional_mc: need gamma > 0");
    if (!(r >= 1)) throw domain_error("exp_functional_mc: need r >= 1");
    return detail::conditioned_exp_functional(nu, gamma, 2, r, n, seed, workers, kappa);
}

inline double iterated_bound_constant(double q, double nu) {
    if (!(q > 2)) throw domain_error("iterated bound: need q > 2");
    const double t = std::pow(2.0, q - 2);
    return std::pow(2.0, nu) * std::pow(2.0, nu * t / (t - 1));
}

struct BoundCheck {
    bool ok = true;
    double constant = 0;
    std::vector<double> r;
    std::vector<PathFunctionalSample> samples;
};

inline BoundCheck exp_functional_bound_check(double nu, double gamma, double q, const std::vector<double>& r_grid,
                                             std::size_t n, std::uint64_t seed, unsigned workers = 1,
                                             double kappa = 0.004) {
    if (!(2 * gamma <= nu * nu)) throw domain_error("bound check: need 2 gamma <= nu^2");
    BoundCheck out;
    out.constant = iterated_bound_constant(q, nu);
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
        if (!(r_grid[k] >= 1)) throw domain_error("bound check: need r >= 1");
        auto s = detail::conditioned_exp_functional(nu, gamma, q, r_grid[k], n, seed + 7919 * k, workers, kappa);
        out.ok = out.ok && (s.estimate - 3 * s.stderr_ < out.constant);
        out.r.push_back(r_grid[k]);
        out.samples.push_back(s);
    }
    return out;
}

}  // namespace sbm
