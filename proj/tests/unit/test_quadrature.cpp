#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covertq/errors.hpp"
#include "covertq/quadrature.hpp"

using namespace covertq;

TEST(Quadrature, Polynomial) {
    const auto r = integrate([](double x) { return 3 * x * x; }, 0.0, 2.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 8.0, 1e-13);
}

TEST(Quadrature, EndpointSingularity) {
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    EXPECT_NEAR(quad([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt), 2.0, 1e-8);
    EXPECT_NEAR(quad([](double x) { return std::log(x); }, 0.0, 1.0, opt), -1.0, 1e-9);
}

TEST(Quadrature, Oscillatory) {
    // A zero integral can only be resolved against an absolute tolerance.
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    EXPECT_NEAR(quad([](double x) { return std::sin(x); }, 0.0, 20 * std::numbers::pi, opt), 0.0, 1e-11);
}

TEST(Quadrature, SemiInfiniteExponential) {
    EXPECT_NEAR(quad_inf([](double x) { return std::exp(-x); }, 0.0), 1.0, 1e-12);
    QuadOptions opt;
    opt.scale = 0.01;
    EXPECT_NEAR(quad_inf([](double x) { return 100.0 * std::exp(-100.0 * x); }, 0.0, opt), 1.0, 1e-11);
    EXPECT_NEAR(quad_inf([](double x) { return std::exp(-x); }, 3.0), std::exp(-3.0), 1e-14);
}

TEST(Quadrature, SemiInfiniteAlgebraicTail) {
    EXPECT_NEAR(quad_inf([](double x) { return 1.0 / (1.0 + x * x); }, 0.0), std::numbers::pi / 2, 1e-10);
    EXPECT_NEAR(quad_inf([](double x) { return std::pow(1.0 + x, -2.5); }, 0.0), 1.0 / 1.5, 1e-10);
}

TEST(Quadrature, GaussianMoment) {
    EXPECT_NEAR(quad_inf([](double x) { return x * x * std::exp(-x * x / 2); }, 0.0), std::sqrt(std::numbers::pi / 2),
                1e-11);
}

TEST(Quadrature, NonConvergenceIsReported) {
    QuadOptions opt;
    opt.max_intervals = 3;
    opt.rel_tol = 1e-15;
    opt.abs_tol = 0.0;
    const auto r = integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_THROW(quad([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, opt), NumericError);
}

TEST(Quadrature, GrowthCurveSeparatesFiniteFromDivergent) {
    const auto fin = truncated_growth([](double x) { return std::exp(-x); }, 0.0, 1.0);
    EXPECT_FALSE(fin.diverges);
    ASSERT_EQ(fin.cutoffs.size(), 3u);
    EXPECT_NEAR(fin.partials.back(), 1.0, 1e-12);
    EXPECT_TRUE(truncated_growth([](double) { return 1.0; }, 0.0, 1.0).diverges);
    EXPECT_TRUE(truncated_growth([](double x) { return 1.0 / (1.0 + x); }, 0.0, 1.0).diverges);
    EXPECT_FALSE(truncated_growth([](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); }, 0.0, 1.0).diverges);
}
