#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "covertq/rng.hpp"

using namespace covertq;

TEST(Rng, SameSeedSameStream) {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, DeriveSeedIsPureAndPathSensitive) {
    EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100; ++i)
        for (std::uint64_t j = 0; j < 100; ++j) seen.insert(derive_seed(9, {i, j}));
    EXPECT_EQ(seen.size(), 10000u);
    EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
    EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
}

TEST(Rng, UniformIsOpenInterval) {
    Rng r(5);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, ExponentialAndBernoulliMoments) {
    Rng r(17);
    const int n = 400000;
    double s = 0.0, hits = 0.0;
    for (int i = 0; i < n; ++i) {
        s += r.exponential(2.0);
        hits += r.bernoulli(0.3);
    }
    EXPECT_NEAR(s / n, 0.5, 5 * 0.5 / std::sqrt(n));
    EXPECT_NEAR(hits / n, 0.3, 5 * std::sqrt(0.21 / n));
}

TEST(Rng, BernoulliEdges) {
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_FALSE(r.bernoulli(0.0));
        ASSERT_TRUE(r.bernoulli(1.0));
    }
}

TEST(Rng, BelowStaysInRange) {
    Rng r(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, SplitStreamsDiffer) {
    const Rng base(77);
    Rng a = base.split(0), b = base.split(1), a2 = base.split(0);
    EXPECT_NE(a.uniform(), b.uniform());
    Rng a3 = base.split(0);
    EXPECT_EQ(a2.uniform(), a3.uniform());
}
