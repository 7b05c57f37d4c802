#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <vector>

#include "covertq/dists.hpp"
#include "covertq/errors.hpp"
#include "covertq/rng.hpp"
#include "covertq/stats.hpp"

using namespace covertq;

namespace {

std::vector<ServiceDist> zoo() {
    return {ServiceDist::exponential(1.0), ServiceDist::exponential(2.5), ServiceDist::erlang(2, 2.0),
            ServiceDist::erlang(5, 0.7), ServiceDist::hyperexp({{0.5, 1.0}, {0.5, 2.0}}),
            ServiceDist::hyperexp({{0.2, 0.3}, {0.3, 1.5}, {0.5, 6.0}})};
}

double boost_integral(const std::function<double(double)>& f) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(f);
}

}  // namespace

TEST(Dists, PdfSpecExamples) {
    EXPECT_DOUBLE_EQ(ServiceDist::exponential(1.0).pdf(0.0), 1.0);
    EXPECT_DOUBLE_EQ(ServiceDist::erlang(2, 2.0).pdf(0.0), 0.0);
    EXPECT_NEAR(ServiceDist::hyperexp({{0.5, 1.0}, {0.5, 2.0}}).pdf(1.0), 0.5 * std::exp(-1.0) + std::exp(-2.0), 1e-15);
    EXPECT_NEAR(ServiceDist::hyperexp({{0.5, 1.0}, {0.5, 2.0}}).pdf(1.0), 0.319275, 1e-6);
}

TEST(Dists, CdfSpecExamples) {
    EXPECT_DOUBLE_EQ(ServiceDist::exponential(1.0).cdf(std::numeric_limits<double>::infinity()), 1.0);
    EXPECT_DOUBLE_EQ(ServiceDist::exponential(2.0).cdf(0.0), 0.0);
    EXPECT_NEAR(ServiceDist::erlang(2, 2.0).cdf(1.0), 1.0 - 3.0 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(ServiceDist::erlang(2, 2.0).cdf(1.0), 0.593994, 1e-6);
}

TEST(Dists, LstSpecExamples) {
    EXPECT_DOUBLE_EQ(ServiceDist::exponential(1.0).lst(1.0), 0.5);
    EXPECT_NEAR(ServiceDist::erlang(2, 2.0).lst(2.0), 0.25, 1e-15);
    for (const auto& d : zoo()) EXPECT_DOUBLE_EQ(d.lst(0.0), 1.0) << d.describe();
}

TEST(Dists, PdfIntegratesToOneAndMatchesMean) {
    for (const auto& d : zoo()) {
        EXPECT_NEAR(boost_integral([&](double x) { return d.pdf(x); }), 1.0, 1e-10) << d.describe();
        EXPECT_NEAR(boost_integral([&](double x) { return x * d.pdf(x); }), d.mean(), 1e-10 * d.mean()) << d.describe();
    }
}

TEST(Dists, CdfIsIntegralOfPdf) {
    for (const auto& d : zoo()) {
        for (double x : {0.1, 0.7, 2.0, 5.0}) {
            boost::math::quadrature::exp_sinh<double> integrator;
            const double tail = integrator.integrate([&](double t) { return d.pdf(x + t); });
            EXPECT_NEAR(d.sf(x), tail, 1e-10) << d.describe() << " x=" << x;
            EXPECT_NEAR(d.cdf(x) + d.sf(x), 1.0, 1e-14);
        }
    }
}

TEST(Dists, LstMatchesQuadrature) {
    for (const auto& d : zoo()) {
        for (double s : {0.3, 1.0, 4.0}) {
            const double ref = boost_integral([&](double x) { return std::exp(-s * x) * d.pdf(x); });
            EXPECT_NEAR(d.lst(s), ref, 1e-11) << d.describe() << " s=" << s;
        }
    }
}

TEST(Dists, LogPdfAgreesWithPdf) {
    for (const auto& d : zoo())
        for (double x : {0.05, 1.0, 3.0, 20.0}) EXPECT_NEAR(d.log_pdf(x), std::log(d.pdf(x)), 1e-12);
}

TEST(Dists, Means) {
    EXPECT_DOUBLE_EQ(ServiceDist::exponential(4.0).mean(), 0.25);
    EXPECT_DOUBLE_EQ(ServiceDist::erlang(3, 1.5).mean(), 2.0);
    EXPECT_NEAR(ServiceDist::hyperexp({{0.25, 1.0}, {0.75, 3.0}}).mean(), 0.25 + 0.25, 1e-15);
}

TEST(Dists, SampleMeans) {
    Rng rng(42);
    for (const auto& d : {ServiceDist::exponential(1.0), ServiceDist::erlang(3, 3.0)}) {
        double s = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) s += d.sample(rng);
        EXPECT_NEAR(s / n, 1.0, 0.005) << d.describe();
    }
}

TEST(Dists, DegenerateMixtureIsExponential) {
    const auto h = ServiceDist::hyperexp({{1.0, 2.0}});
    Rng rng(7);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = h.sample(rng);
    const auto ks = ks_test(xs, [](double x) { return 1.0 - std::exp(-2.0 * x); });
    EXPECT_GT(ks.p_value, 0.01);
}

TEST(Dists, SamplesFollowCdf) {
    for (const auto& d : zoo()) {
        Rng rng(99);
        std::vector<double> xs(50000);
        for (auto& x : xs) x = d.sample(rng);
        EXPECT_GT(ks_test(xs, [&](double x) { return d.cdf(x); }).p_value, 0.001) << d.describe();
    }
}

TEST(Dists, InvalidParametersThrow) {
    EXPECT_THROW(ServiceDist::exponential(0.0), InvalidConfig);
    EXPECT_THROW(ServiceDist::exponential(-1.0), InvalidConfig);
    EXPECT_THROW(ServiceDist::erlang(0, 1.0), InvalidConfig);
    EXPECT_THROW(ServiceDist::erlang(2, 0.0), InvalidConfig);
    EXPECT_THROW(ServiceDist::hyperexp({{0.5, 1.0}, {0.4, 2.0}}), InvalidConfig);
    EXPECT_THROW(ServiceDist::hyperexp({{1.5, 1.0}, {-0.5, 2.0}}), InvalidConfig);
    EXPECT_THROW(ServiceDist::hyperexp({}), InvalidConfig);
}

TEST(Dists, NegativeArgumentThrows) {
    const auto d = ServiceDist::exponential(1.0);
    EXPECT_THROW(d.pdf(-0.1), DomainError);
    EXPECT_THROW(d.cdf(-0.1), DomainError);
    EXPECT_THROW(d.lst(-0.1), DomainError);
}

TEST(Dists, RateBounds) {
    const auto h = ServiceDist::hyperexp({{0.2, 0.3}, {0.3, 1.5}, {0.5, 6.0}});
    EXPECT_DOUBLE_EQ(h.min_rate(), 0.3);
    EXPECT_DOUBLE_EQ(h.max_rate(), 6.0);
    EXPECT_DOUBLE_EQ(ServiceDist::erlang(3, 2.0).min_rate(), 2.0);
}
