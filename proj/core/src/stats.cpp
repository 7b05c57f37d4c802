#include "covertq/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "covertq/errors.hpp"

namespace covertq {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double chi_square_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("KS test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    // Asymptotic Kolmogorov distribution with Stephens' small-sample correction.
    const double sn = std::sqrt(n);
    const double lam = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    if (lam < 0.2) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int j = 1; j <= 100; ++j) {
            const double term = sign * std::exp(-2.0 * j * j * lam * lam);
            p += term;
            if (std::abs(term) < 1e-12) break;
            sign = -sign;
        }
        p = std::clamp(2.0 * p, 0.0, 1.0);
    }
    return {d, p};
}

MannKendall mann_kendall(const std::vector<double>& x) {
    MannKendall mk;
    const std::size_t n = x.size();
    if (n < 3) return mk;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
    // Variance with the tie correction.
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const double nn = static_cast<double>(n);
    double var = nn * (nn - 1.0) * (2.0 * nn + 5.0);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        if (t > 1.0) var -= t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    var /= 18.0;
    mk.s = s;
    if (var <= 0.0) return mk;
    if (s > 0.0) mk.z = (s - 1.0) / std::sqrt(var);
    else if (s < 0.0) mk.z = (s + 1.0) / std::sqrt(var);
    mk.p_decreasing = normal_cdf(mk.z);
    mk.p_increasing = 1.0 - normal_cdf(mk.z);
    return mk;
}

double lag1_autocorrelation(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + 1 < n) num += (x[i] - mean) * (x[i + 1] - mean);
    }
    return den > 0.0 ? num / den : 0.0;
}

double RunningMean::stderr_mean() const { return n > 1.0 ? std::sqrt(variance() / n) : 0.0; }

}  // namespace covertq
