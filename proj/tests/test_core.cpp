#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/fit.hpp"
#include "sbmlab/core/parallel.hpp"
#include "sbmlab/core/rng.hpp"
#include "sbmlab/core/roots.hpp"
#include "sbmlab/core/stats.hpp"

using namespace sbm;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a = Rng::stream(42, 3), b = Rng::stream(42, 3), c = Rng::stream(42, 4);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        seen.insert(x);
        seen.insert(c());
    }
    EXPECT_EQ(seen.size(), 200u);
}

TEST(Rng, UniformMeanAndRange) {
    Rng g(7);
    RunningStats s;
    for (int i = 0; i < 100000; ++i) {
        const double u = g.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        s.add(u);
    }
    EXPECT_NEAR(s.mean(), 0.5, 4 * std::sqrt(1.0 / 12 / 1e5));
}

TEST(Stats, RunningStatsMatchesTwoPass) {
    const std::vector<double> v{1, 4, 4, 5, 9, 10};
    RunningStats s;
    for (double x : v) s.add(x);
    EXPECT_DOUBLE_EQ(s.mean(), 5.5);
    EXPECT_NEAR(s.variance(), 11.5, 1e-12);
    EXPECT_EQ(s.count(), 6u);
}

TEST(Stats, ZScore) {
    EXPECT_DOUBLE_EQ(z_score(1.3, 0.1, 1.0), 3.0);
    EXPECT_TRUE(std::isfinite(z_score(1.0, 0.0, 1.0)));
}

TEST(Fit, OlsRecoversLine) {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(2.5 * i - 1);
    }
    const auto f = ols(x, y);
    EXPECT_NEAR(f.estimate, 2.5, 1e-12);
    EXPECT_NEAR(f.intercept, -1, 1e-12);
    EXPECT_NEAR(f.r2, 1, 1e-12);
}

TEST(Fit, LogLogRecoversPower) {
    std::vector<double> x, y;
    for (double t : {1.0, 2.0, 4.0, 8.0}) {
        x.push_back(t);
        y.push_back(3 * std::pow(t, -1.7));
    }
    EXPECT_NEAR(loglog_fit(x, y).estimate, -1.7, 1e-12);
    EXPECT_THROW(loglog_fit({1, 2}, {1, 0}), input_error);
}

TEST(Roots, Bracketed) {
    const auto r = solve_bracketed([](double x) { return x * x - 2; }, 0, -2, 2, 2, 1e-14, 0);
    EXPECT_NEAR(r.x, std::sqrt(2.0), 1e-12);
    EXPECT_THROW(solve_bracketed([](double x) { return x * x + 1; }, 0, 1, 1, 2, 1e-12, 0), convergence_error);
}

TEST(Csv, RoundTripWithQuotingAndMeta) {
    CsvTable t({"name", "value"});
    t.add_meta("kind", "test");
    t.row({"a,b", fmt_num(0.1)});
    t.row({"say \"hi\"", fmt_num(1e-300)});
    const auto path = (std::filesystem::temp_directory_path() / "sbmlab_csv_test.csv").string();
    t.save(path);
    const auto r = read_csv(path);
    EXPECT_EQ(r.header(), t.header());
    EXPECT_EQ(r.rows(), t.rows());
    EXPECT_EQ(r.str(), t.str());
    EXPECT_THROW(t.row({"only one"}), input_error);
}

TEST(Csv, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3, 6.0, 1e-9, -2.5e7}) EXPECT_NEAR(std::stod(fmt_num(v)), v, 1e-11 * std::abs(v));
}

TEST(Parallel, CoversEveryIndexOnce) {
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) EXPECT_EQ(h, 1);
    EXPECT_GE(resolve_workers(3), 1u);
}
