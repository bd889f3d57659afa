#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sbmlab/sim/cloud.hpp"
#include "sbmlab/sim/experiments.hpp"

using namespace sbm;

namespace {

SimConfig base(int d, double N, double horizon, std::uint64_t seed) {
    SimConfig c;
    c.d = d;
    c.N = N;
    c.horizon = horizon;
    c.master_seed = seed;
    return c;
}

}  // namespace

TEST(StepScheme, ExtinctionMatchesOffspringRecursion) {
    SimConfig c = base(1, 20, 0.5, 3);
    c.dt = 0.005;
    const std::size_t reps = 3000;
    std::size_t extinct = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        Rng g = Rng::stream(c.master_seed, i);
        auto cl = make_cloud(c);
        run_cloud(cl, c, g);
        extinct += cl.extinct();
    }
    const double q = step_extinction_prob(c.N, c.dt, 100, 20);
    const double f = static_cast<double>(extinct) / reps;
    EXPECT_LT(std::abs(f - q), 4 * std::sqrt(q * (1 - q) / reps)) << f << " vs " << q;
}

TEST(StepScheme, MeanMassConserved) {
    SimConfig c = base(1, 20, 1.0, 4);
    c.dt = 0.005;
    RunningStats s;
    for (std::size_t i = 0; i < 3000; ++i) {
        Rng g = Rng::stream(c.master_seed, i);
        auto cl = make_cloud(c);
        run_cloud(cl, c, g);
        s.add(cl.total_mass());
    }
    EXPECT_LT(std::abs(s.mean() - 1), 4 * s.stderr_mean());
}

TEST(StepScheme, RejectsCoarseStep) {
    SimConfig c = base(1, 100, 1.0, 1);
    c.dt = 0.01;
    EXPECT_THROW(make_cloud(c), domain_error);
}

TEST(Lineage, ExtinctionMatchesFiniteNLaw) {
    SimConfig c = base(1, 50, 1.0, 5);
    const auto s = run_extinction(c, 4000, 1);
    ASSERT_EQ(s.n_censored(), 0u);
    const double q = finite_n_extinction_by(1.0, 50, 1.0);
    EXPECT_LT(std::abs(s.frequency() - q), 4 * std::sqrt(q * (1 - q) / 4000));
    // The finite-N law tends to exp(-2 y0/t).
    EXPECT_NEAR(finite_n_extinction_by(1.0, 1e8, 1.0), std::exp(-2.0), 1e-7);
}

TEST(Lineage, OccupationConservedAndUnbiased) {
    SimConfig c = base(2, 40, 1.0, 6);
    RunningStats s;
    for (std::size_t i = 0; i < 1500; ++i) {
        Rng g = Rng::stream(c.master_seed, i);
        auto grid = OccupationGrid::centered(2, 1.0, 0.1);
        LineageEngine eng(c, g);
        LineageOptions o;
        o.sink = &grid;
        const auto r = eng.run(o);
        ASSERT_NEAR(grid.total(), r.occupation, 1e-9 * (1 + r.occupation));
        s.add(r.occupation);
    }
    // Critical branching: expected mass-time up to t is y0 * t.
    EXPECT_LT(std::abs(s.mean() - 1), 4 * s.stderr_mean());
}

TEST(Lineage, HalfspaceExtinctionMatchesFiniteNLaw) {
    // With w = 1 - v/N, P(Y_r = 0) = (1 - v(0)/N)^(N y0), v(x) = 6/(r - x + c)^2, 6/c^2 = N.
    const double N = 30, r = 1, y0 = 1;
    SimConfig c = base(1, N, std::numeric_limits<double>::infinity(), 7);
    c.cap = 50000000;
    const auto p = run_exit_halfspace_d1(y0, {r}, c, 2000, 1);
    const double cc = std::sqrt(6 / N);
    const double v = 6 / ((r + cc) * (r + cc));
    const double target = finite_n_transform(v, N, y0);
    const auto chk = laplace_check(p.level(0), std::numeric_limits<double>::infinity(), target, 4.0);
    EXPECT_TRUE(chk.pass) << chk.lo << " " << chk.hi << " vs " << target;
}

TEST(Lineage, HalfspaceMartingaleSlopeNearOne) {
    SimConfig c = base(1, 30, std::numeric_limits<double>::infinity(), 8);
    c.cap = 50000000;
    const auto p = run_exit_halfspace_d1(1.0, {0.5, 1.0}, c, 1500, 1);
    const auto e = martingale_slope(p, 0);
    EXPECT_LT(std::abs(e.value - 1), 4 * e.stderr_ + 0.05);
}

TEST(Lineage, DeterministicAcrossWorkers) {
    SimConfig c = base(3, 20, std::numeric_limits<double>::infinity(), 9);
    c.cap = 1000000;
    const auto a = run_exit_sphere(3, {1, 0, 0}, 0.2, c, 64, 1, 5, 1);
    const auto b = run_exit_sphere(3, {1, 0, 0}, 0.2, c, 64, 1, 5, 3);
    EXPECT_EQ(a.mass, b.mass);
    EXPECT_EQ(a.events, b.events);
    EXPECT_EQ(a.escaped, b.escaped);
    c.master_seed = 10;
    const auto d = run_exit_sphere(3, {1, 0, 0}, 0.2, c, 64, 1, 5, 1);
    EXPECT_NE(a.events, d.events);
}

TEST(Lineage, SphereExitMassesAreWholeParticles) {
    SimConfig c = base(2, 25, std::numeric_limits<double>::infinity(), 11);
    const auto s = run_exit_sphere(2, {1, 0, 0}, 0.25, c, 200, 1, 4, 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double k = s.mass[i] * 25;
        EXPECT_NEAR(k, std::round(k), 1e-9);
    }
}

TEST(Lineage, InputErrors) {
    SimConfig c = base(1, 10, 1.0, 1);
    EXPECT_THROW(run_exit_sphere(2, {0.1, 0, 0}, 0.2, c, 1), domain_error);
    EXPECT_THROW(run_exit_halfspace_d1(1, {1.0, 0.5}, c, 1), input_error);
    c.initial = {Atom{{0, 0, 0}, 0.55}};
    EXPECT_THROW(run_extinction(c, 1), domain_error);
    c = base(1, 10, std::numeric_limits<double>::infinity(), 1);
    EXPECT_THROW(run_extinction(c, 1), domain_error);
}

TEST(Checkpoint, RoundTripContinuesIdentically) {
    SimConfig c = base(2, 50, 0.4, 12);
    c.dt = 0.001;
    c.surfaces = {Surface::halfspace(0.3)};
    Rng g = Rng::stream(c.master_seed, 0);
    auto cl = make_cloud(c);
    for (int k = 0; k < 100 && !cl.extinct(); ++k) step(cl, c, g);
    const auto path = (std::filesystem::temp_directory_path() / "sbmlab_ckpt_test.bin").string();
    save_checkpoint(path, cl, 2, g);
    auto ck = load_checkpoint(path);
    EXPECT_EQ(ck.d, 2);
    EXPECT_EQ(ck.cloud.time, cl.time);
    EXPECT_EQ(ck.cloud.alive, cl.alive);
    EXPECT_EQ(ck.cloud.frozen.size(), cl.frozen.size());
    EXPECT_EQ(ck.cloud.particle_steps, cl.particle_steps);
    run_cloud(cl, c, g);
    run_cloud(ck.cloud, c, ck.rng);
    EXPECT_EQ(ck.cloud.alive, cl.alive);
    EXPECT_EQ(ck.cloud.total_mass(), cl.total_mass());

    {
        std::ofstream f(path, std::ios::binary);
        f << "NOTACKPT";
    }
    EXPECT_THROW(load_checkpoint(path), input_error);
    std::filesystem::remove(path);
}
