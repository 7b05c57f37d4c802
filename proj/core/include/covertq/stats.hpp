#pragma once

#include <functional>
#include <vector>

namespace covertq {

double normal_cdf(double z);
// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double dof);

struct KsResult {
    double d = 0.0;
    double p_value = 0.0;
};
// One-sample Kolmogorov-Smirnov test against a continuous cdf.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

struct MannKendall {
    double s = 0.0;
    double z = 0.0;
    double p_decreasing = 1.0;  // one-sided p-value for a downward trend
    double p_increasing = 1.0;
    bool decreasing(double alpha) const { return p_decreasing < alpha; }
};
// Mann-Kendall trend test with the normal approximation and continuity correction.
MannKendall mann_kendall(const std::vector<double>& x);

double lag1_autocorrelation(const std::vector<double>& x);

struct RunningMean {
    double n = 0.0, mean = 0.0, m2 = 0.0;
    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
    double stderr_mean() const;
};

}  // namespace covertq
