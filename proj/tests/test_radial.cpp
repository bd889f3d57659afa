#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sbmlab/radial/exponents.hpp"
#include "sbmlab/radial/kpp.hpp"
#include "sbmlab/radial/rates.hpp"
#include "sbmlab/radial/solvers.hpp"

using namespace sbm;

const double inf = std::numeric_limits<double>::infinity();

TEST(Exponents, ClosedForms) {
    EXPECT_NEAR(exponents(1).p, 3, 1e-12);
    EXPECT_NEAR(exponents(1).alpha, 1.0 / 3, 1e-12);
    EXPECT_NEAR(exponents(2).p, 2 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(exponents(2).alpha, std::sqrt(2.0) - 1, 1e-12);
    EXPECT_NEAR(exponents(3).p, (1 + std::sqrt(17.0)) / 2, 1e-12);
    EXPECT_NEAR(exponents(3).alpha, (std::sqrt(17.0) - 3) / 2, 1e-12);
    EXPECT_NEAR(exponents(1).mu, -0.5, 1e-15);
    EXPECT_NEAR(exponents(1).nu, 3.5, 1e-12);
    EXPECT_NEAR(exponents(2).boundary_dim, 1.1716, 1e-4);
    EXPECT_NEAR(exponents(3).boundary_dim, 2.4384, 1e-4);
    EXPECT_THROW(exponents(4), domain_error);
}

TEST(Exponents, Identities) {
    for (int d = 1; d <= 3; ++d) {
        const auto e = exponents(d);
        EXPECT_NEAR(e.mu + e.nu, e.p, 1e-12);
        EXPECT_NEAR(e.nu * e.nu - e.mu * e.mu, 4.0 * (4 - d), 1e-12);
        EXPECT_NEAR(e.alpha * (4 - d), e.p - 2, 1e-12);
    }
}

TEST(VInfinity, Values) {
    EXPECT_DOUBLE_EQ(v_infinity(3, 1), 2);
    EXPECT_DOUBLE_EQ(v_infinity(2, 2), 1);
    EXPECT_DOUBLE_EQ(v_infinity(1, 1), 6);
    EXPECT_THROW(v_infinity(3, 0), domain_error);
}

TEST(ExactD1, PointSource) {
    EXPECT_NEAR(v_lambda_exact_d1(12, 0), 6, 1e-12);
    EXPECT_NEAR(v_lambda_exact_d1(12, 1), 1.5, 1e-12);
    EXPECT_NEAR(v_lambda_exact_d1(12, -1), 1.5, 1e-12);
    // u'' = u^2 away from the source, checked by finite differences.
    const double x = 0.7, h = 1e-4;
    const double upp = (v_lambda_exact_d1(5, x + h) - 2 * v_lambda_exact_d1(5, x) + v_lambda_exact_d1(5, x - h)) / (h * h);
    EXPECT_NEAR(upp, std::pow(v_lambda_exact_d1(5, x), 2), 1e-5);
}

TEST(ExactD1, Exit) {
    EXPECT_NEAR(u_exit_exact_d1(6, 1), 1.5, 1e-12);
    EXPECT_NEAR(u_exit_exact_d1(inf, 2), 1.5, 1e-12);
    EXPECT_NEAR(u_exit_exact_d1(6, 0), 6, 1e-12);
}

TEST(SolveVLambda, MatchesD1ClosedForm) {
    const auto g = log_grid(0.1, 10, 41);
    for (double lam : {1.0, 12.0, 1000.0}) {
        const auto s = solve_v_lambda(1, lam, g);
        ASSERT_EQ(s.u.size(), g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double ex = v_lambda_exact_d1(lam, g[i]);
            EXPECT_NEAR(s.u[i] / ex, 1, 1e-6) << "lambda=" << lam << " r=" << g[i];
        }
    }
}

TEST(SolveVLambda, ScalingSelfConsistency) {
    for (int d : {2, 3})
        for (double s : {2.0, 0.5}) {
            const double lam = 3;
            const std::vector<double> r{0.5, 1, 2};
            std::vector<double> rs;
            for (double x : r) rs.push_back(x / s);
            const auto a = solve_v_lambda(d, lam, r);
            const auto b = solve_v_lambda(d, lam * std::pow(s, 4 - d), rs);
            for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(a.u[i] / (b.u[i] / (s * s)), 1, 1e-6);
        }
}

TEST(SolveVLambda, MonotoneInLambdaAndBelowVInfinity) {
    for (int d : {2, 3}) {
        const std::vector<double> r{0.5, 1, 2, 4};
        std::vector<double> prev(r.size(), 0);
        for (double lam : {0.1, 1.0, 10.0, 100.0}) {
            const auto s = solve_v_lambda(d, lam, r);
            for (std::size_t i = 0; i < r.size(); ++i) {
                EXPECT_GT(s.u[i], prev[i]);
                EXPECT_LT(s.u[i], v_infinity(d, r[i]));
                if (i) {
                    EXPECT_LT(s.u[i], s.u[i - 1]);
                }
            }
            prev = s.u;
        }
    }
}

TEST(SolveVLambda, RecoversSourceFlux) {
    for (int d : {2, 3}) {
        const auto s = solve_v_lambda(d, 5, {1.0});
        EXPECT_NEAR(s.flux / 5, 1, 0.01) << "d=" << d;
    }
}

TEST(SolveUExit, MatchesD1ClosedForm) {
    for (double lam : {1.0, 6.0, inf}) {
        const auto s = solve_u_exit(1, lam, 0.5, {0.6, 1, 2, 5});
        for (std::size_t i = 0; i < s.r.size(); ++i)
            EXPECT_NEAR(s.u[i] / u_exit_exact_d1(lam, s.r[i] - 0.5), 1, 1e-6) << "lambda=" << lam << " r=" << s.r[i];
    }
}

TEST(SolveUExit, IncreasingInLambda) {
    for (int d : {2, 3}) {
        double prev = 0;
        for (double lam : {0.1, 1.0, 10.0, inf}) {
            const double u = solve_u_exit(d, lam, 0.1, {1.0}).u[0];
            EXPECT_GT(u, prev);
            prev = u;
        }
        // Missing the small ball is harder than missing its centre.
        EXPECT_GT(prev, v_infinity(d, 1.0));
    }
}

TEST(SolveUExit, DecreasesToVInfinityAsBallShrinks) {
    for (int d : {2, 3}) {
        double prev = inf;
        for (double eps : {0.2, 0.1, 0.05}) {
            const double u = solve_u_exit(d, inf, eps, {1.0}).u[0];
            EXPECT_LT(u, prev);
            EXPECT_GT(u, v_infinity(d, 1.0));
            prev = u;
        }
    }
}

TEST(Rates, DeficitDecaysWithKnownExponents) {
    const auto f = fit_rate_exponents(3, {1e3, 1e4, 1e5, 1e6}, {1, 2, 4, 8});
    EXPECT_NEAR(f.p.estimate, exponents(3).p, 0.02);
    EXPECT_NEAR(f.alpha.estimate, exponents(3).alpha, 0.02);
    EXPECT_GT(f.p.r2, 0.999);
}

TEST(Kpp, TailRates) {
    const std::vector<std::pair<double, double>> cases{{1.0 / 8, 0.5}, {1.0 / 9, 1.0 / 3}, {3.0 / 25, 0.4}};
    for (const auto& [beta, rate] : cases) {
        const auto w = kpp_wave(beta, -20, 60, 801);
        EXPECT_NEAR(w.tail_rate.estimate, rate, 0.01) << "beta=" << beta;
    }
    EXPECT_EQ(kpp_wave(1.0 / 8, -20, 60, 801).poly_order, 1);
}

TEST(Kpp, ProfileIsMonotone) {
    const auto w = kpp_wave(1.0 / 9, -20, 60, 401);
    for (std::size_t i = 1; i < w.phi.size(); ++i) EXPECT_GE(w.phi[i], w.phi[i - 1] - 1e-12);
    EXPECT_NEAR(w.phi.back(), 1, 1e-6);
}

TEST(Grid, LogGridEndpoints) {
    const auto g = log_grid(0.1, 10, 5);
    EXPECT_NEAR(g.front(), 0.1, 1e-15);
    EXPECT_NEAR(g.back(), 10, 1e-12);
    EXPECT_NEAR(g[2], 1, 1e-12);
}
