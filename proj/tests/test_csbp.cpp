#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sbmlab/csbp/csbp.hpp"

using namespace sbm;

const double inf = std::numeric_limits<double>::infinity();

TEST(Csbp, ClosedForm) {
    EXPECT_NEAR(u_lambda(0, 3.7), 3.7, 1e-12);
    EXPECT_NEAR(u_lambda(1, 6), 1.5, 1e-12);
    EXPECT_NEAR(u_lambda(2, inf), 1.5, 1e-12);
    for (double lam : {0.5, 6.0, 100.0}) EXPECT_NEAR(u_lambda(0.7, lam), 6 / std::pow(0.7 + std::sqrt(6 / lam), 2), 1e-12);
}

TEST(Csbp, OdeAgreesWithClosedForm) {
    for (double lam : {0.3, 6.0, 500.0})
        for (double t : {0.1, 1.0, 3.0}) EXPECT_NEAR(u_lambda_ode(t, lam) / u_lambda(t, lam), 1, 1e-9);
}

TEST(Csbp, SemigroupProperty) {
    for (double lam : {0.5, 6.0, 80.0})
        for (double s : {0.1, 0.9}) EXPECT_LT(semigroup_defect(lam, s, 0.4), 1e-12);
}

TEST(Csbp, LawValues) {
    EXPECT_NEAR(extinction_prob(1), std::exp(-6.0), 1e-15);
    EXPECT_NEAR(laplace_transform(1, 6), std::exp(-1.5), 1e-15);
    EXPECT_DOUBLE_EQ(laplace_transform(1, 0), 1);
    CsbpParams two;
    two.y0 = 2;
    EXPECT_NEAR(extinction_prob(2, two), std::exp(-2 * 6.0 / 4), 1e-15);
}

TEST(Csbp, MonotoneInLambdaAndTime) {
    double prev = 1;
    for (double lam : {0.1, 1.0, 10.0, inf}) {
        const double v = laplace_transform(1, lam);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(extinction_prob(0.5), extinction_prob(1));
}

TEST(Csbp, FiniteNLawConvergesToLimit) {
    const double lim = laplace_transform(1, 6);
    double prev = inf;
    for (double N : {10.0, 100.0, 1000.0, 1e5}) {
        const double gap = std::abs(finite_n_laplace(1, 6, N) - lim);
        EXPECT_LT(gap, prev);
        prev = gap;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Csbp, RejectsBadInput) {
    EXPECT_THROW(u_lambda(-1, 1), domain_error);
    EXPECT_THROW(u_lambda(1, -1), domain_error);
    CsbpParams bad;
    bad.p = 2.5;
    EXPECT_THROW(u_lambda(1, 1, bad), domain_error);
}
