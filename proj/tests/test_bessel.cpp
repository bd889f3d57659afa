#include <gtest/gtest.h>

#include <cmath>

#include "sbmlab/bessel/bessel.hpp"
#include "sbmlab/bessel/qprocess.hpp"
#include "sbmlab/radial/exponents.hpp"

using namespace sbm;

TEST(Besq, ExactStepMeanAndVariance) {
    // BESQ^delta from y at time h: mean y + delta h, variance 4 y h + 2 delta h^2.
    Rng g(11);
    const double y = 2, delta = 3, h = 0.5;
    RunningStats s;
    for (int i = 0; i < 200000; ++i) s.add(besq_step(y, delta, h, g));
    const double var = 4 * y * h + 2 * delta * h * h;
    EXPECT_NEAR(s.mean(), y + delta * h, 4 * std::sqrt(var / 2e5));
    EXPECT_NEAR(s.variance() / var, 1, 0.03);
}

TEST(Hitting, ClosedForm) {
    EXPECT_DOUBLE_EQ(hitting_prob(1, 2, 1), 0.25);
    EXPECT_DOUBLE_EQ(hitting_prob(2.5, 3, 3), 1);
    EXPECT_NEAR(hitting_prob(2 * std::sqrt(2.0), 4, 1), std::pow(0.25, 4 * std::sqrt(2.0)), 1e-15);
    EXPECT_THROW(hitting_prob(1, 1, 2), domain_error);
}

TEST(Hitting, MonteCarloWithinThreeSE) {
    BesselSpec s;
    s.nu = 1;
    s.r = 2;
    s.R = 1;
    const auto h = hitting_prob_mc(s, 20000, 5, 1);
    EXPECT_LT(std::abs(h.estimate - 0.25), 3 * h.stderr_);
}

TEST(ExpFunctional, ClosedForm) {
    EXPECT_NEAR(exp_functional_exact(2, 1, 2), std::pow(2.0, 2 - std::sqrt(2.0)), 1e-15);
    EXPECT_DOUBLE_EQ(exp_functional_exact(2, 1, 1), 1);
    EXPECT_THROW(exp_functional_exact(1, 1, 2), domain_error);
}

TEST(ExpFunctional, MonteCarloWithinThreeSE) {
    const auto e = exp_functional_mc(2, 1, 2, 20000, 9, 1);
    EXPECT_LT(std::abs(e.estimate - exp_functional_exact(2, 1, 2)), 3 * e.stderr_);
}

TEST(IteratedBound, Constant) {
    EXPECT_DOUBLE_EQ(iterated_bound_constant(3, 2), 64);
    EXPECT_THROW(iterated_bound_constant(2, 1), domain_error);
}

TEST(Yor, ConstantPhiAgrees) {
    const auto y = yor_identity_check(1, 0.5, 2, 1, 0.5, {PhiKind::constant, 1}, 20000, 3, 1, 0.004);
    EXPECT_NEAR(y.nu, std::sqrt(1 + 0.25), 1e-15);
    EXPECT_LT(std::abs(y.lhs.estimate - y.rhs.estimate), 3 * std::hypot(y.lhs.stderr_, y.rhs.stderr_));
}

TEST(QProcess, QuadratureBelowBoundAndMonotone) {
    const auto e = exponents(3);
    const QProcessParams qp{e.nu, e.p};
    EXPECT_NEAR(q_hitting_quadrature(qp, 2, 2), 1, 1e-9);
    double prev = 1;
    for (double a : {6.0, 4.0, 2.0, 1.0}) {
        const double h = q_hitting_quadrature(qp, 8, a);
        EXPECT_LE(h, q_hitting_bound(qp, 8, a));
        EXPECT_LT(h, prev);
        prev = h;
    }
    EXPECT_NEAR(q_hitting_bound(qp, 4, 1), std::exp(2.0) * std::pow(0.25, e.nu), 1e-12);
}

TEST(QProcess, ScaleTailAgainstMidpointSum) {
    // Midpoint rule in log y over [x, 1e8 x]; the remainder is below 1e-16.
    const auto e = exponents(2);
    const QProcessParams qp{e.nu, e.p};
    const double x = 1.5;
    const int n = 400000;
    const double lo = std::log(x), hi = std::log(1e8 * x), h = (hi - lo) / n;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const double y = std::exp(lo + (i + 0.5) * h);
        sum += y * std::pow(y, -1 - qp.nu) * std::exp(-2 * std::pow(y, 1 - qp.p / 2)) * h;
    }
    EXPECT_NEAR(q_scale_tail(qp, x) / sum, 1, 1e-8);
}

TEST(QProcess, MonteCarloAgreesWithQuadrature) {
    const auto e = exponents(3);
    const auto q = q_process_hitting(4, 1, e.nu, e.p, 4000, 21, 1, 0.004);
    EXPECT_LT(q.z, 3);
    EXPECT_TRUE(q.bound_ok);
}
