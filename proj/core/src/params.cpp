#include "covertq/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "covertq/errors.hpp"

namespace covertq {

SystemParams::SystemParams(double lambda_, ServiceDist g1_, ServiceDist g2_)
    : lambda(lambda_), g1(std::move(g1_)), g2(std::move(g2_)) {}

SystemParams SystemParams::make(double lambda, ServiceDist g1, ServiceDist g2) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidConfig("lambda must be a positive finite rate");
    SystemParams sp(lambda, std::move(g1), std::move(g2));
    sp.mu1 = 1.0 / sp.g1.mean();
    sp.mu2 = 1.0 / sp.g2.mean();
    sp.r = sp.mu1 / sp.mu2;
    if (std::abs(sp.r - 1.0) < 1e-9) sp.r = 1.0;
    sp.beta = sp.r == 1.0 ? std::numeric_limits<double>::infinity() : sp.r / (sp.r - 1.0);
    sp.p = 1.0 - sp.g2.lst(lambda);
    sp.rho1 = lambda / sp.mu1;
    sp.rho2 = lambda / sp.mu2;
    if (!(sp.rho1 < 1.0)) {
        std::ostringstream os;
        os << "unstable under H0: rho1 = lambda/mu1 = " << sp.rho1 << " >= 1";
        throw StabilityError(os.str());
    }
    return sp;
}

BatchPMF::BatchPMF(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidConfig("batch PMF must have at least one entry");
    double total = 0.0;
    mean_ = 0.0;
    for (std::size_t s = 0; s < probs_.size(); ++s) {
        if (!(probs_[s] >= 0.0)) throw InvalidConfig("batch probabilities must be nonnegative");
        total += probs_[s];
        mean_ += static_cast<double>(s) * probs_[s];
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidConfig("batch probabilities must sum to 1");
}

BatchPMF BatchPMF::point(std::size_t size) {
    std::vector<double> probs(size + 1, 0.0);
    probs[size] = 1.0;
    return BatchPMF(std::move(probs));
}

double BatchPMF::generating(double z) const {
    // Horner evaluation of sum_s Q(s) z^s.
    double acc = 0.0;
    for (auto it = probs_.rbegin(); it != probs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

}  // namespace covertq
