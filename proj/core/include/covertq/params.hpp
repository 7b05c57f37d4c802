#pragma once

#include <cstddef>
#include <vector>

#include "covertq/dists.hpp"

namespace covertq {

// Model parameters: Willie's Poisson rate and the two service laws, with the
// derived constants used throughout the analysis.
struct SystemParams {
    double lambda = 0.0;
    ServiceDist g1;
    ServiceDist g2;

    double mu1 = 0.0;    // 1 / E[G1]
    double mu2 = 0.0;    // 1 / E[G2]
    double r = 0.0;      // mu1 / mu2, snapped to 1 within 1e-9
    double beta = 0.0;   // r / (r - 1); infinity when r == 1
    double p = 0.0;      // 1 - G2*(lambda), the interference probability
    double rho1 = 0.0;   // lambda / mu1
    double rho2 = 0.0;   // lambda / mu2

    // Validates lambda > 0 and rho1 < 1 (StabilityError otherwise).
    static SystemParams make(double lambda, ServiceDist g1, ServiceDist g2);

    bool exp_exp() const { return g1.is_exponential() && g2.is_exponential(); }
    bool r_is_one() const { return r == 1.0; }
    double pbar() const { return 1.0 - p; }

private:
    SystemParams(double lambda, ServiceDist g1, ServiceDist g2);
};

// Batch-size law Q(s), s = 0..S, for the II-A policy.
class BatchPMF {
public:
    BatchPMF() : probs_{1.0} {}
    explicit BatchPMF(std::vector<double> probs);

    // Q(s) = 1 for the given size.
    static BatchPMF point(std::size_t size);

    double operator()(std::size_t s) const { return s < probs_.size() ? probs_[s] : 0.0; }
    std::size_t max_size() const { return probs_.size() - 1; }
    const std::vector<double>& probs() const { return probs_; }

    // Mean batch size B.
    double mean() const { return mean_; }
    // Generating function sum_s Q(s) z^s.
    double generating(double z) const;
    // Q-bar(0) = 1 - Q(0).
    double tail0() const { return 1.0 - (*this)(0); }

private:
    std::vector<double> probs_;
    double mean_ = 0.0;
};

}  // namespace covertq
