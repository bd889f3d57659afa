#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "sbmlab/frontier/diagnostics.hpp"
#include "sbmlab/frontier/energy.hpp"
#include "sbmlab/frontier/experiments.hpp"
#include "sbmlab/frontier/frontier.hpp"
#include "sbmlab/frontier/levy.hpp"
#include "sbmlab/frontier/tails.hpp"

using namespace sbm;

TEST(BoxCount, LineSquareCircleSphere) {
    const int n = 256;
    const auto line = positive_set(indicator_field(2, n, 1.0, [](const std::array<int, 3>& c) { return c[1] == 17; }));
    EXPECT_NEAR(box_dimension(line).estimate, 1, 1e-9);
    const auto square = positive_set(indicator_field(2, n, 1.0, [](const std::array<int, 3>&) { return true; }));
    EXPECT_NEAR(box_dimension(square).estimate, 2, 1e-9);
    const auto circle = extract_frontier(ball_field(2, 512, 0.4 * 512), 0);
    EXPECT_NEAR(box_dimension(circle).estimate, 1, 0.05);
    const auto sphere = extract_frontier(ball_field(3, 128, 0.4 * 128), 0);
    EXPECT_NEAR(box_dimension(sphere).estimate, 2, 0.05);
    for (const auto* s : {&line, &square, &circle, &sphere}) EXPECT_TRUE(box_count_sandwich(*s));
}

TEST(BoxCount, SandwichHoldsForRandomSets) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng g(seed);
        const int d = 1 + static_cast<int>(seed % 3);
        const double keep = 0.02 + 0.5 * g.uniform();
        const auto f = indicator_field(d, d == 3 ? 32 : 128, 0.1, [&](const std::array<int, 3>&) { return g.uniform() < keep; });
        const auto fs = positive_set(f);
        EXPECT_TRUE(box_count_sandwich(fs)) << "seed " << seed;
        ASSERT_FALSE(fs.counts.empty());
        EXPECT_EQ(fs.counts.back(), 1u);
        EXPECT_EQ(fs.counts.front(), fs.size());
    }
}

TEST(Frontier, CellCounts) {
    const int n = 64;
    const auto full = indicator_field(2, n, 1.0, [](const std::array<int, 3>&) { return true; });
    EXPECT_EQ(extract_frontier(full, 0).size(), 4u * (n - 1));
    const auto empty = indicator_field(2, n, 1.0, [](const std::array<int, 3>&) { return false; });
    EXPECT_EQ(extract_frontier(empty, 0).size(), 0u);
    EXPECT_THROW(box_dimension(extract_frontier(empty, 0)), input_error);
    const auto interval = indicator_field(1, n, 1.0, [](const std::array<int, 3>& c) { return c[0] >= 10 && c[0] < 30; });
    EXPECT_EQ(extract_frontier(interval, 0).size(), 2u);
    const auto dot = indicator_field(3, 8, 1.0, [](const std::array<int, 3>& c) { return c == std::array<int, 3>{3, 4, 5}; });
    EXPECT_EQ(extract_frontier(dot, 0).size(), 1u);
    EXPECT_THROW(extract_frontier(full, -1), domain_error);
}

TEST(Frontier, DefaultTauIsLowPercentileOfPositiveValues) {
    LocalTimeField f;
    f.d = 1;
    f.shape = {201, 1, 1};
    for (int i = 0; i < 201; ++i) f.values.push_back(i < 101 ? 0.0 : i - 100.0);
    EXPECT_DOUBLE_EQ(default_tau(f), 1.0);
    EXPECT_DOUBLE_EQ(default_tau(f, 0.5), 50.0);
    f.values.assign(201, 0.0);
    EXPECT_DOUBLE_EQ(default_tau(f), 0.0);
}

TEST(Energy, TwoPointsAndCircle) {
    EXPECT_NEAR(energy_integral({{0, 0, 0}, {2, 0, 0}}, {1, 1}, 1.0, 1).value, 1.0, 1e-15);
    const auto c = energy_integral({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}, {1, 1, 1}, 0.5, 2);
    EXPECT_EQ(c.coincident_pairs, 2u);
    EXPECT_NEAR(c.value, 4.0, 1e-15);
    // Uniform measure on the unit circle, by direct quadrature of the chord kernel.
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double beta : {0.25, 0.5, 0.75}) {
        const double q = ts.integrate([&](double t) { return std::pow(2 * std::sin(t / 2), -beta); }, 0.0, M_PI) / M_PI;
        EXPECT_NEAR(circle_energy_exact(beta), q, 1e-9 * q) << beta;
    }
    EXPECT_THROW(circle_energy_exact(1.5), domain_error);
}

TEST(Energy, CapacityOfTwoPointsIsHalfTheInverseKernel) {
    // Optimal weights are (1/2, 1/2); energy = 2 * 1/4 * |x - y|^-beta.
    const auto r = capacity_proxy({{0, 0, 0}, {1, 0, 0}}, 1.0, 2);
    EXPECT_NEAR(r.energy, 0.5, 1e-12);
    EXPECT_NEAR(r.capacity, 2.0, 1e-12);
}

TEST(Levy, SmallThetaConstant) {
    // As theta -> 0 the weight is 1 on all but u < theta/e, so
    // psi / theta^beta -> 2 int (1 - cos u) u^(-1-beta) du = -2 Gamma(-beta) cos(pi beta / 2).
    for (double beta : {0.25, 0.5}) {
        const double limit = -2 * boost::math::tgamma(-beta) * std::cos(M_PI * beta / 2);
        EXPECT_NEAR(levy_psi(1e-4, beta).value / std::pow(1e-4, beta), limit, 1e-4 * limit) << beta;
    }
}

TEST(Levy, SymmetricAndSandwiched) {
    EXPECT_NEAR(levy_psi(3.0, 0.7).value, levy_psi(-3.0, 0.7).value, 1e-12);
    const auto s = psi_sandwich(0.7, 1e-2, 1e2, 9);
    EXPECT_GT(s.c_lo, 0);
    EXPECT_LT(s.spread(), 10);
    // The log^2 weight makes psi grow faster than |theta|^beta at large theta.
    EXPECT_GT(levy_psi(1e3, 0.7).value / std::pow(1e3, 0.7), 10 * levy_psi(1.0, 0.7).value);
    EXPECT_THROW(levy_psi(0.0, 0.7), domain_error);
}

TEST(Tails, ExponentsFromSyntheticSamples) {
    // P(L > 0) = 0.5 x^-p and L = U^(1/alpha) given L > 0, so P(0 < L <= a) = 0.5 x^-p a^alpha.
    const double alpha = 0.4, p = 2.5;
    const std::vector<double> xs{1, 1.5, 2};
    const std::vector<double> as{1e-3, 1e-2, 1e-1};
    std::vector<std::vector<double>> samples(xs.size());
    Rng g(99);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (int k = 0; k < 400000; ++k) {
            const bool pos = g.uniform() < 0.5 * std::pow(xs[i], -p);
            samples[i].push_back(pos ? std::pow(g.uniform(), 1 / alpha) : 0.0);
        }
    const auto t = tail_exponents(samples, as, xs, 0, 2);
    ASSERT_TRUE(t.has_alpha);
    ASSERT_TRUE(t.has_p);
    EXPECT_NEAR(t.alpha.estimate, alpha, 4 * t.alpha.stderr_ + 0.01);
    EXPECT_NEAR(t.p.estimate, p, 4 * t.p.stderr_ + 0.05);
    EXPECT_EQ(t.table.size(), 9u);
    EXPECT_THROW(tail_exponents(samples, as, {1, 2}), input_error);
}

TEST(Tails, LaplaceLocalSlopeFrozenValues) {
    EXPECT_NEAR(laplace_local_slope(1, 1, 1e-2), 0.6150, 1e-3);
    EXPECT_NEAR(laplace_local_slope(3, 1, 1e-2), 0.5587, 1e-3);
    EXPECT_NEAR(laplace_local_slope(1, 1, 1e-1), 0.489, 2e-3);
    // The slope reaches alpha only as a -> 0, far more slowly in d = 1.
    EXPECT_NEAR(laplace_local_slope(1, 1, 1e-10), exponents(1).alpha, 2e-3);
    EXPECT_NEAR(laplace_local_slope(3, 1, 1e-10), exponents(3).alpha, 1e-3);
}

TEST(Probes, MeanLocalTimeIsHeatKernelIntegral) {
    // Critical branching keeps the mean measure at p_s, so E L^x(t) = int_0^t p_s(x) ds.
    SimConfig c;
    c.d = 1;
    c.N = 40;
    c.horizon = 1;
    c.master_seed = 21;
    const double x = 0.5, h = 0.05;
    const auto s = run_local_time_probes(c, axis_probes(1, x), h, std::numeric_limits<double>::infinity(), 3000, 1);
    RunningStats m;
    for (const auto& r : s.L) m.add(0.5 * (r[0] + r[1]));
    boost::math::quadrature::tanh_sinh<double> ts;
    const double target = ts.integrate([&](double u) { return u > 0 ? std::exp(-x * x / (2 * u)) / std::sqrt(2 * M_PI * u) : 0.0; }, 0.0, 1.0);
    EXPECT_LT(std::abs(m.mean() - target), 4 * m.stderr_mean() + 0.01 * target) << m.mean() << " vs " << target;
    EXPECT_EQ(s.n_censored(), 0u);
}

TEST(Diagnostics, HolderRatioAndTwoPoint) {
    LocalTimeField f = indicator_field(1, 10, 0.5, [](const std::array<int, 3>& c) { return c[0] >= 5; });
    f.origin = {-2.5, 0, 0};
    EXPECT_NEAR(holder_ratio(f, 1.0, 0.0, 3.0), 2.0, 1e-12);
    const auto e = two_point_moment({1, 1}, {1, 1}, 1.0, 0.5);
    EXPECT_NEAR(e.value, std::exp(-2.0), 1e-15);
}
