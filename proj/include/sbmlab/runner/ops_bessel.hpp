#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sbmlab/bessel/bessel.hpp"
#include "sbmlab/bessel/qprocess.hpp"
#include "sbmlab/radial/exponents.hpp"
#include "sbmlab/runner/ops_pde.hpp"

namespace sbm::ops {

inline void sample_row(CsvTable& t, const std::string& check, const PathFunctionalSample& s, double target, double z) {
    t.row({check, fmt_num(s.n_paths), fmt_num(s.estimate), fmt_num(s.stderr_), fmt_num(target), fmt_num(z)});
}

inline Job bessel_suite(Params& p) {
    const std::size_t n = p.replicates(100000);
    const double kappa = p.num("kappa", 0.004);
    p.check(n >= 100, "replicates", "need at least 100 paths");
    p.check(kappa > 0 && kappa <= 0.05, "kappa", "must lie in (0, 0.05]");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        auto& t = out.table("bessel_suite", {"check", "paths", "estimate", "stderr", "target", "z"});
        auto seed = [&](int k) { return derive_seed(ctx.seed, "bessel." + std::to_string(k)); };
        const unsigned w = ctx.workers;

        out.gate("hitting_prob(nu=1,r=2,R=1)", 5, "abs", hitting_prob(1, 2, 1), 0.25, tol::closed_form);
        out.gate("hitting_prob(R=r)", 5, "abs", hitting_prob(2.5, 3, 3), 1.0, tol::closed_form);
        {
            BesselSpec s;
            s.nu = 1;
            s.r = 2;
            s.R = 1;
            s.kappa = kappa;
            const auto h = hitting_prob_mc(s, n, seed(1), w);
            const double ex = hitting_prob(1, 2, 1);
            auto& g = out.z_gate("hitting MC nu=1 r=2 R=1", 5, h.estimate, h.stderr_, ex, tol::z_max);
            sample_row(t, g.name, h, ex, g.z);
        }
        {
            BesselSpec s;
            s.nu = 2 * std::sqrt(2.0);
            s.r = 4;
            s.R = 1;
            s.kappa = kappa;
            const auto h = hitting_prob_mc(s, n, seed(2), w);
            const double ex = hitting_prob(s.nu, 4, 1);
            auto& g = out.z_gate("hitting MC nu=2sqrt2 r=4 R=1", 5, h.estimate, h.stderr_, ex, tol::z_max);
            sample_row(t, g.name, h, ex, g.z);
        }
        struct YorCase {
            std::string name;
            double lambda, mu, r, R, t;
            PhiDescriptor phi;
        };
        const double mu3 = exponents(3).mu;
        const std::vector<YorCase> yor{
            {"Yor lambda=0 Phi=exp(-rho_t)", 0.0, 1.0, 2, 1, 1.0, {PhiKind::exp_neg_rho, 1}},
            {"Yor d=3 lambda=2 Phi=1", 2.0, mu3, 2, 1, 50.0, {PhiKind::constant, 1}},
            {"Yor Phi=1(tau_R<=t) small t", 1.0, 0.5, 2, 1, 0.01, {PhiKind::hit_by_t, 1}},
        };
        int k = 3;
        for (const auto& c : yor) {
            const auto y = yor_identity_check(c.lambda, c.mu, c.r, c.R, c.t, c.phi, n, seed(k++), w, kappa);
            const double se = std::hypot(y.lhs.stderr_, y.rhs.stderr_);
            auto& g = out.z_gate(c.name, 5, y.lhs.estimate, se, y.rhs.estimate, tol::z_max, "lhs vs rhs, combined SE");
            sample_row(t, c.name + " lhs", y.lhs, y.rhs.estimate, g.z);
            sample_row(t, c.name + " rhs", y.rhs, y.lhs.estimate, g.z);
        }
        {
            const auto e = exp_functional_mc(2, 1, 2, n, seed(k++), w, kappa);
            const double ex = exp_functional_exact(2, 1, 2);
            auto& g = out.z_gate("exp functional nu=2 gamma=1 r=2", 5, e.estimate, e.stderr_, ex, tol::z_max);
            sample_row(t, g.name, e, ex, g.z);
            out.gate("exp functional closed form nu=2 gamma=1 r=2", 5, "abs", ex, std::pow(2.0, 2 - std::sqrt(2.0)), tol::closed_form);
            out.gate("exp functional r=1", 5, "abs", exp_functional_exact(2, 1, 1), 1.0, tol::closed_form);
        }
        {
            const auto b = exp_functional_bound_check(2, 1, 3, {1, 2, 4, 8}, n / 4, seed(k++), w, kappa);
            out.gate("iterated bound constant q=3 nu=2", 5, "abs", b.constant, 64, tol::closed_form);
            double worst = 0;
            for (std::size_t i = 0; i < b.samples.size(); ++i) {
                sample_row(t, "iterated bound r=" + fmt_num(b.r[i]), b.samples[i], b.constant, 0);
                worst = std::max(worst, b.samples[i].estimate + tol::z_max * b.samples[i].stderr_);
            }
            out.gate("iterated bound q=3 nu=2: estimates + 3SE <= C", 5, "max", worst, b.constant, 0);
            out.check("iterated bound check q=3 nu=2", 5, b.ok);
        }
        {
            const auto ex = exponents(3);
            const auto q = q_process_hitting(4, 1, ex.nu, ex.p, n, seed(k++), w, kappa);
            auto& g = out.z_gate("Q-process hitting x0=4 a=1 d=3: MC vs quadrature", 5, q.mc.estimate, q.mc.stderr_, q.quadrature,
                                 tol::z_max);
            sample_row(t, g.name, q.mc, q.quadrature, g.z);
            out.gate("Q-process quadrature <= e^2 (a/x0)^nu", 5, "max", q.quadrature, q.bound, 0);
            const auto same = q_process_hitting(2, 2, ex.nu, ex.p, 100, seed(k++), w, kappa);
            out.gate("Q-process hitting a=x0", 5, "abs", same.quadrature, 1.0, tol::closed_form);
            const auto occ = q_occupation_check(4, 1, ex.nu, ex.p, ex.nu + 2, n / 4, seed(k++), w, kappa);
            out.gate("Q-process occupation of Y^-gamma below its bound, gamma=nu+2", 0, "max",
                     occ.mc.estimate + tol::z_max * occ.mc.stderr_, occ.bound.value, 0);
            sample_row(t, "Q-process occupation gamma=nu+2", occ.mc, occ.bound.value, 0);
        }
        return out;
    };
}

// Single hitting probability, exact and by simulation.
inline Job bessel_hitting(Params& p) {
    const double nu = p.num("nu", 1.0), r = p.num("r", 2.0), R = p.num("R", 1.0);
    const std::size_t n = p.replicates(10000);
    const double kappa = p.num("kappa", 0.004);
    p.check(nu >= -0.5, "nu", "need nu >= -1/2");
    p.check(R > 0 && r >= R, "R", "need 0 < R <= r");
    p.check(kappa > 0 && kappa <= 0.05, "kappa", "must lie in (0, 0.05]");
    return [=](const RunContext& ctx) {
        ExperimentOutput out;
        auto& t = out.table("hitting", {"check", "paths", "estimate", "stderr", "target", "z"});
        BesselSpec s;
        s.nu = nu;
        s.r = r;
        s.R = R;
        s.kappa = kappa;
        const auto h = hitting_prob_mc(s, n, ctx.seed, ctx.workers);
        const double ex = hitting_prob(nu, r, R);
        auto& g = out.z_gate("hitting MC", 0, h.estimate, h.stderr_, ex, tol::z_max);
        sample_row(t, "hitting", h, ex, g.z);
        return out;
    };
}

}  // namespace sbm::ops
