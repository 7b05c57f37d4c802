#include <gtest/gtest.h>

#include <cmath>

#include "covertq/rng.hpp"
#include "covertq/stats.hpp"

using namespace covertq;

TEST(Stats, NormalAndChiSquare) {
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_NEAR(chi_square_sf(3.841458820694124, 1), 0.05, 1e-12);
    EXPECT_NEAR(chi_square_sf(18.307038053275146, 10), 0.05, 1e-12);
}

TEST(Stats, KsStatistic) {
    const auto r = ks_test({0.1, 0.4, 0.7, 0.9}, [](double x) { return x; });
    EXPECT_NEAR(r.d, 0.2, 1e-15);
    EXPECT_GT(r.p_value, 0.5);
}

TEST(Stats, KsRejectsWrongLaw) {
    Rng rng(1);
    std::vector<double> xs(5000);
    for (auto& x : xs) x = rng.exponential(1.0);
    EXPECT_GT(ks_test(xs, [](double x) { return 1 - std::exp(-x); }).p_value, 0.01);
    EXPECT_LT(ks_test(xs, [](double x) { return 1 - std::exp(-1.2 * x); }).p_value, 1e-6);
}

TEST(Stats, MannKendallStrictlyDecreasing) {
    const auto mk = mann_kendall({5, 4, 3, 2, 1});
    EXPECT_EQ(mk.s, -10);
    EXPECT_NEAR(mk.z, -9.0 / std::sqrt(50.0 / 3.0), 1e-12);
    EXPECT_NEAR(mk.p_decreasing, normal_cdf(mk.z), 1e-15);
    EXPECT_TRUE(mk.decreasing(0.05));
    EXPECT_FALSE(mann_kendall({1, 2, 3, 4, 5}).decreasing(0.05));
}

TEST(Stats, MannKendallSmallSampleThreshold) {
    // n = 5 needs S <= -8 for one-sided significance at 0.05.
    EXPECT_TRUE(mann_kendall({0.95, 0.90, 0.94, 0.85, 0.84}).decreasing(0.05));
    EXPECT_FALSE(mann_kendall({0.95, 0.90, 0.96, 0.85, 0.91}).decreasing(0.05));
}

TEST(Stats, MannKendallTies) {
    const auto mk = mann_kendall({1, 1, 1, 1});
    EXPECT_EQ(mk.s, 0);
    EXPECT_FALSE(mk.decreasing(0.05));
}

TEST(Stats, Lag1Autocorrelation) {
    EXPECT_NEAR(lag1_autocorrelation({1, -1, 1, -1, 1, -1, 1, -1}), -0.875, 1e-12);
    Rng rng(3);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.uniform();
    EXPECT_LT(std::abs(lag1_autocorrelation(x)), 3.0 / std::sqrt(1e5));
}

TEST(Stats, RunningMean) {
    RunningMean m;
    for (double x : {1.0, 2.0, 3.0, 4.0}) m.add(x);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.variance(), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.stderr_mean(), std::sqrt(5.0 / 12.0), 1e-15);
}
