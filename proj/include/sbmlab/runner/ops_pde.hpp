#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sbmlab/csbp/csbp.hpp"
#include "sbmlab/radial/exponents.hpp"
#include "sbmlab/radial/kpp.hpp"
#include "sbmlab/radial/rates.hpp"
#include "sbmlab/radial/solvers.hpp"
#include "sbmlab/runner/gates.hpp"
#include "sbmlab/runner/manifest.hpp"
#include "sbmlab/runner/tolerances.hpp"

namespace sbm {

struct RunContext {
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

using Job = std::function<ExperimentOutput(const RunContext&)>;

namespace ops {

inline int dim_param(Params& p, const std::string& key = "d", int def = 3) {
    const int d = p.integer(key, def);
    p.check(d >= 1 && d <= 3, key, "must be 1, 2 or 3");
    return d;
}

inline void check_positive(Params& p, const std::vector<double>& v, const std::string& key) {
    p.check(!v.empty(), key, "empty list");
    for (double x : v) p.check(x > 0, key, "values must be positive");
}

inline void check_increasing(Params& p, const std::vector<double>& v, const std::string& key) {
    for (std::size_t i = 1; i < v.size(); ++i) p.check(v[i] > v[i - 1], key, "values must be increasing");
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]) / std::abs(b[i]));
    return e;
}

// d and r are paired elementwise.
inline Job v_infinity_table(Params& p) {
    const auto ds = p.list("d", {3, 2, 1});
    const auto rs = p.list("r", {1, 2, 1});
    p.check(ds.size() == rs.size(), "r", "needs one radius per dimension");
    for (double d : ds) p.check(d == 1 || d == 2 || d == 3, "d", "must be 1, 2 or 3");
    check_positive(p, rs, "r");
    return [=](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("v_infinity", {"d", "r", "v_infinity"});
        for (std::size_t i = 0; i < ds.size(); ++i)
            t.row({fmt_num(static_cast<int>(ds[i])), fmt_num(rs[i]), fmt_num(v_infinity(static_cast<int>(ds[i]), rs[i]))});
        return out;
    };
}

inline Job v_lambda_table(Params& p) {
    const int d = dim_param(p);
    const double lambda = p.num("lambda", 1.0);
    const double r_min = p.num("r_min", 0.1), r_max = p.num("r_max", 10.0);
    const int n = p.integer("n", 41);
    p.check(lambda > 0 && std::isfinite(lambda), "lambda", "must be positive and finite");
    p.check(r_min > 0 && r_max > r_min, "r_max", "need 0 < r_min < r_max");
    p.check(n >= 2, "n", "need at least 2 points");
    return [=](const RunContext&) {
        ExperimentOutput out;
        const auto sol = solve_v_lambda(d, lambda, log_grid(r_min, r_max, static_cast<std::size_t>(n)));
        out.tables.emplace_back("v_lambda", to_csv(sol));
        return out;
    };
}

inline Job u_exit_table(Params& p) {
    const int d = dim_param(p);
    const double lambda = p.num("lambda", 1.0);
    const double eps = p.num("epsilon", 1.0);
    const double r_max = p.num("r_max", 10.0);
    const int n = p.integer("n", 41);
    p.check(lambda > 0, "lambda", "must be positive");
    p.check(eps > 0 && r_max > eps, "r_max", "need 0 < epsilon < r_max");
    p.check(n >= 2, "n", "need at least 2 points");
    return [=](const RunContext&) {
        ExperimentOutput out;
        const auto sol = solve_u_exit(d, lambda, eps, log_grid(eps, r_max, static_cast<std::size_t>(n)));
        out.tables.emplace_back("u_exit", to_csv(sol));
        return out;
    };
}

inline Job closed_form_suite(Params&) {
    return [](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("closed_form", {"quantity", "value", "expected"});
        auto eq = [&](const std::string& name, double v, double expect, int crit = 1) {
            t.row({name, fmt_num(v), fmt_num(expect)});
            out.gate(name, crit, "abs", v, expect, tol::closed_form);
        };
        const double inf = std::numeric_limits<double>::infinity();
        eq("v_infinity(d=3,r=1)", v_infinity(3, 1), 2);
        eq("v_infinity(d=2,r=2)", v_infinity(2, 2), 1);
        eq("v_infinity(d=1,r=1)", v_infinity(1, 1), 6);
        eq("v_lambda_d1(lambda=12,x=0)", v_lambda_exact_d1(12, 0), 6);
        eq("v_lambda_d1(lambda=12,x=1)", v_lambda_exact_d1(12, 1), 1.5);
        eq("v_lambda_d1(lambda=inf,x=1)", v_lambda_exact_d1(inf, 1), 6);
        // v'(0+) = -lambda recovers the source strength.
        const double hdx = 1e-6;
        const double slope = (v_lambda_exact_d1(12, 2 * hdx) - v_lambda_exact_d1(12, 0)) / (2 * hdx);
        t.row({"v_lambda_d1 slope at 0+, lambda=12", fmt_num(slope), "-12"});
        out.gate("v_lambda_d1 slope at 0+, lambda=12", 1, "rel", slope, -12, 1e-5, "central difference, step 1e-6");
        eq("u_exit_d1(lambda=6,dist=1)", u_exit_exact_d1(6, 1), 1.5);
        eq("u_exit_d1(lambda=inf,dist=2)", u_exit_exact_d1(inf, 2), 1.5);
        const CsbpParams prm;
        eq("u_lambda(t=0,lambda=3.7)", u_lambda(0, 3.7, prm), 3.7);
        eq("u_lambda(t=1,lambda=6)", u_lambda(1, 6, prm), 1.5);
        eq("u_lambda(t=2,lambda=inf)", u_lambda(2, inf, prm), 1.5);
        for (double lam : {0.5, 6.0, 100.0})
            eq("u_lambda closed form vs 6(t+sqrt(6/lambda))^-2, lambda=" + fmt_num(lam), u_lambda(0.7, lam, prm),
               6 / std::pow(0.7 + std::sqrt(6 / lam), 2));
        eq("u_lambda ODE vs closed form (rel), lambda=6,t=1", std::abs(u_lambda_ode(1, 6, prm) / u_lambda(1, 6, prm) - 1), 0);
        eq("semigroup defect lambda=6,s=0.3,t=0.5", semigroup_defect(6, 0.3, 0.5, prm), 0);
        eq("extinction_prob(r=1)", extinction_prob(1, prm), std::exp(-6.0));
        eq("laplace_transform(r=1,lambda=6)", laplace_transform(1, 6, prm), std::exp(-1.5));
        for (int d = 1; d <= 3; ++d) {
            const auto e = exponents(d);
            const std::string s = "d=" + std::to_string(d);
            eq("mu+nu-p " + s, e.mu + e.nu - e.p, 0);
            eq("nu^2-mu^2-4(4-d) " + s, e.nu * e.nu - e.mu * e.mu - 4.0 * (4 - d), 0);
            eq("alpha(4-d)-(p-2) " + s, e.alpha * (4 - d) - (e.p - 2), 0);
        }
        eq("p(d=1)", exponents(1).p, 3);
        eq("p(d=2)", exponents(2).p, 2 * std::sqrt(2.0));
        eq("p(d=3)", exponents(3).p, (1 + std::sqrt(17.0)) / 2);
        eq("alpha(d=1)", exponents(1).alpha, 1.0 / 3);
        eq("alpha(d=2)", exponents(2).alpha, std::sqrt(2.0) - 1);
        eq("alpha(d=3)", exponents(3).alpha, (std::sqrt(17.0) - 3) / 2);
        return out;
    };
}

inline Job pde_exact_suite(Params& p) {
    const auto lambdas = p.list("lambdas", {1, 12, 1000});
    const int n = p.integer("n", 81);
    const double s_factor = p.num("scale", 2.0);
    check_positive(p, lambdas, "lambdas");
    p.check(n >= 2, "n", "need at least 2 points");
    p.check(s_factor > 0 && s_factor != 1, "scale", "must be positive and != 1");
    return [=](const RunContext&) {
        ExperimentOutput out;
        const auto grid = log_grid(0.1, 10, static_cast<std::size_t>(n));
        auto& t = out.table("pde_exact", {"check", "d", "lambda", "max_rel_error"});
        for (double lam : lambdas) {
            const auto sol = solve_v_lambda(1, lam, grid);
            std::vector<double> ex;
            for (double x : grid) ex.push_back(v_lambda_exact_d1(lam, x));
            const double e = max_rel_error(sol.u, ex);
            t.row({"d1 shooting vs closed form", "1", fmt_num(lam), fmt_num(e)});
            out.gate("d1 V^lambda vs closed form on [0.1,10], lambda=" + fmt_num(lam), 2, "max", e, tol::pde_relative, 0,
                     "max relative error");
        }
        // V^lambda(x) = s^-2 V^{lambda s^(4-d)}(x/s)
        for (int d = 2; d <= 3; ++d)
            for (double lam : {1.0, 10.0})
                for (double s : {s_factor, 1 / s_factor}) {
                    const auto a = solve_v_lambda(d, lam, grid);
                    std::vector<double> g2;
                    for (double x : grid) g2.push_back(x / s);
                    const auto b = solve_v_lambda(d, lam * std::pow(s, 4 - d), g2);
                    std::vector<double> rhs;
                    for (double v : b.u) rhs.push_back(v / (s * s));
                    const double e = max_rel_error(a.u, rhs);
                    t.row({"scaling s=" + fmt_num(s), std::to_string(d), fmt_num(lam), fmt_num(e)});
                    out.gate("scaling d=" + std::to_string(d) + " lambda=" + fmt_num(lam) + " s=" + fmt_num(s), 2, "max", e,
                             tol::pde_relative, 0, "max relative error");
                }
        // d = 1 exit problem against its closed form.
        for (double lam : {1.0, 6.0, std::numeric_limits<double>::infinity()}) {
            const auto sol = solve_u_exit(1, lam, 1.0, log_grid(1.0, 10.0, 41));
            std::vector<double> ex;
            for (double r : sol.r) ex.push_back(u_exit_exact_d1(lam, r - 1));
            std::vector<double> u = sol.u;
            if (std::isinf(lam)) {  // boundary value is infinite
                u.erase(u.begin());
                ex.erase(ex.begin());
            }
            const double e = max_rel_error(u, ex);
            t.row({"d1 exit vs closed form", "1", fmt_num(lam), fmt_num(e)});
            out.gate("d1 U^lambda vs closed form, lambda=" + fmt_num(lam), 0, "max", e, tol::pde_relative, 0, "max relative error");
        }
        // Shape properties of the radial solutions.
        for (int d = 1; d <= 3; ++d) {
            const auto sol = solve_v_lambda(d, 10.0, grid);
            bool dec = true, flux = true, below = true;
            for (std::size_t i = 1; i < sol.r.size(); ++i) {
                dec = dec && sol.u[i] < sol.u[i - 1];
                const double f0 = std::pow(sol.r[i - 1], d - 1) * sol.du[i - 1];
                const double f1 = std::pow(sol.r[i], d - 1) * sol.du[i];
                flux = flux && f1 >= f0 - 1e-7 * std::abs(f0);
            }
            for (std::size_t i = 0; i < sol.r.size(); ++i) below = below && sol.u[i] < v_infinity(d, sol.r[i]);
            const std::string s = "d=" + std::to_string(d) + " lambda=10";
            out.check("V^lambda strictly decreasing, " + s, 0, dec);
            out.check("r^(d-1) V' nondecreasing, " + s, 0, flux);
            out.check("V^lambda < V_inf, " + s, 0, below);
        }
        for (int d = 2; d <= 3; ++d)
            for (double dl : {0.1, 0.5, 1.0}) {
                const auto sol = solve_u_exit(d, dl, 1.0, log_grid(1.0, 100.0, 61));
                bool ok = true;
                for (std::size_t i = 0; i < sol.r.size(); ++i) ok = ok && sol.u[i] <= v_infinity(d, sol.r[i]);
                out.check("U^{lambda,1} <= V_inf, d=" + std::to_string(d) + " lambda=" + fmt_num(dl), 0, ok);
            }
        {
            const double v = solve_v_lambda(3, 1e6, {0.5, 1.0, 2.0}).u[1];
            t.row({"d3 lambda=1e6 at r=1", "3", "1000000", fmt_num(v)});
            out.gate("V^1e6(1) below V_inf(1)=2, d=3", 0, "max", v, 2.0, 0, "value " + fmt_num(v));
            const double v5 = solve_v_lambda(3, 1e5, {0.5, 1.0, 2.0}).u[1];
            t.row({"d3 lambda=1e5 at r=1", "3", "100000", fmt_num(v5)});
            out.gate("(2 - V^1e6(1)) / (2 - V^1e5(1)) vs 10^-alpha, d=3", 0, "rel", (2 - v) / (2 - v5),
                     std::pow(10.0, -exponents(3).alpha), tol::exponent);
        }
        return out;
    };
}

inline Job rate_exponents(Params& p) {
    const int d = dim_param(p);
    const auto lambdas = p.list("lambdas", {1e3, 1e4, 1e5, 1e6});
    const auto xs = p.list("xs", {1, 2, 4, 8});
    check_positive(p, lambdas, "lambdas");
    check_positive(p, xs, "xs");
    p.check(lambdas.size() >= 4, "lambdas", "need at least 4 values");
    p.check(xs.size() >= 4, "xs", "need at least 4 values");
    for (double l : lambdas)
        for (double x : xs) p.check(l * std::pow(x, 4 - d) >= 1, "lambdas", "need lambda |x|^(4-d) >= 1");
    return [=](const RunContext&) {
        ExperimentOutput out;
        const auto f = fit_rate_exponents(d, lambdas, xs);
        const auto e = exponents(d);
        auto& t = out.table("rate_exponents", {"exponent", "estimate", "stderr", "r2", "target", "n_points"});
        t.row({"p", fmt_num(f.p.estimate), fmt_num(f.p.stderr_), fmt_num(f.p.r2), fmt_num(e.p), fmt_num(f.p.n_points)});
        t.row({"alpha", fmt_num(f.alpha.estimate), fmt_num(f.alpha.stderr_), fmt_num(f.alpha.r2), fmt_num(e.alpha),
               fmt_num(f.alpha.n_points)});
        auto& pts = out.table("fit_points", {"fit", "log_x", "log_y"});
        for (const auto* fit : {&f.p, &f.alpha})
            for (std::size_t i = 0; i < fit->xs.size(); ++i) pts.row({fit->name, fmt_num(fit->xs[i]), fmt_num(fit->ys[i])});
        const int crit = d >= 2 ? 3 : 0;
        const std::string s = " d=" + std::to_string(d);
        out.gate("p" + s, crit, "abs", f.p.estimate, e.p, d == 1 ? 1e-3 : tol::exponent);
        out.gate("alpha" + s, crit, "abs", f.alpha.estimate, e.alpha, d == 1 ? 1e-3 : tol::exponent);
        out.gate("R2 p fit" + s, crit, "min", f.p.r2, tol::r2_min, 0);
        out.gate("R2 alpha fit" + s, crit, "min", f.alpha.r2, tol::r2_min, 0);
        out.plots.push_back({"fit_p", f.p, "V_inf - V^lambda against |x|" + s, "log |x|", "log deficit"});
        out.plots.push_back({"fit_alpha", f.alpha, "V_inf - V^lambda against lambda" + s, "log lambda", "log deficit"});
        return out;
    };
}

inline Job kpp_rates(Params& p) {
    const auto betas = p.list("betas", {1.0 / 8, 1.0 / 9, 3.0 / 25});
    const auto targets = p.list("rates", {0.5, 1.0 / 3, 0.4});
    p.check(betas.size() == targets.size(), "rates", "one target per beta");
    for (double b : betas) p.check(b > 0 && b <= 0.125 + 1e-15, "betas", "need 0 < beta <= 1/8");
    const double t_min = p.num("t_min", -20), t_max = p.num("t_max", 60);
    const int n = p.integer("n", 801);
    const double fit_lo = p.num("fit_lo", 20), fit_hi = p.num("fit_hi", 50);
    p.check(t_max > t_min && n >= 2, "t_max", "bad grid");
    p.check(fit_lo >= t_min && fit_hi <= t_max && fit_hi > fit_lo, "fit_lo", "fit window must lie inside the grid");
    return [=](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("kpp_rates", {"beta", "decay_rate", "stderr", "r2", "poly_order", "target", "phi_at_0"});
        auto& prof = out.table("kpp_profiles", {"beta", "t", "phi", "one_minus_phi"});
        for (std::size_t i = 0; i < betas.size(); ++i) {
            const auto w = kpp_wave(betas[i], t_min, t_max, static_cast<std::size_t>(n), fit_lo, fit_hi);
            double phi0 = 0;
            for (std::size_t k = 0; k + 1 < w.t.size(); ++k)
                if (w.t[k] <= 0 && w.t[k + 1] > 0) phi0 = w.phi[k] + (w.phi[k + 1] - w.phi[k]) * (0 - w.t[k]) / (w.t[k + 1] - w.t[k]);
            t.row({fmt_num(betas[i]), fmt_num(w.tail_rate.estimate), fmt_num(w.tail_rate.stderr_), fmt_num(w.tail_rate.r2),
                   fmt_num(w.poly_order), fmt_num(targets[i]), fmt_num(phi0)});
            for (std::size_t k = 0; k < w.t.size(); k += 10)
                prof.row({fmt_num(betas[i]), fmt_num(w.t[k]), fmt_num(w.phi[k]), fmt_num(w.one_minus_phi[k])});
            const std::string s = " beta=" + fmt_num(betas[i]);
            out.gate("decay rate" + s, 4, "abs", w.tail_rate.estimate, targets[i], tol::kpp_rate);
            const bool critical = std::abs(1 - 8 * betas[i]) < 1e-12;
            out.gate("polynomial factor order" + s, 4, "abs", w.poly_order, critical ? 1 : 0, 0);
            out.plots.push_back({"fit_kpp_beta" + std::to_string(i), w.tail_rate, "KPP tail" + s, "t", "log(1-phi) corrected"});
        }
        return out;
    };
}

inline Job convrate_table(Params& p) {
    const int d = dim_param(p, "d", 2);
    const auto delta0 = p.list("delta0", {0.1, 0.05, 0.025});
    const double delta = p.num("delta", 0.1);
    check_positive(p, delta0, "delta0");
    for (double x : delta0) p.check(x < 1, "delta0", "must lie in (0, 1)");
    p.check(delta > 0 && delta < 1, "delta", "must lie in (0, 1)");
    return [=](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("convrate", {"d", "delta0", "delta", "rho", "rho_delta0", "natural"});
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (double d0 : delta0) {
            const auto c = convrate_threshold(d, d0, delta);
            t.row({fmt_num(d), fmt_num(d0), fmt_num(delta), fmt_num(c.rho), fmt_num(c.rho_delta0), fmt_num(c.natural)});
            lo = std::min(lo, c.rho_delta0);
            hi = std::max(hi, c.rho_delta0);
        }
        out.gate("rho*delta0 spread across delta0, d=" + std::to_string(d), 0, "max", (hi - lo) / hi, tol::convrate_spread, 0,
                 "relative spread");
        out.diagnostic();
        return out;
    };
}

inline Job csbp_laws(Params& p) {
    const auto ts = p.list("r", {0.25, 0.5, 1, 2, 4});
    const auto lambdas = p.list("lambdas", {1, 6, std::numeric_limits<double>::infinity()});
    CsbpParams prm;
    prm.y0 = p.num("y0", 1.0);
    check_positive(p, ts, "r");
    check_positive(p, lambdas, "lambdas");
    p.check(prm.y0 >= 0, "y0", "must be non-negative");
    return [=](const RunContext&) {
        ExperimentOutput out;
        auto& t = out.table("csbp_laws", {"r", "lambda", "u_lambda", "laplace_transform", "extinction_prob"});
        for (double r : ts)
            for (double l : lambdas)
                t.row({fmt_num(r), fmt_num(l), fmt_num(u_lambda(r, l, prm)), fmt_num(laplace_transform(r, l, prm)),
                       fmt_num(extinction_prob(r, prm))});
        return out;
    };
}

}  // namespace ops
}  // namespace sbm
