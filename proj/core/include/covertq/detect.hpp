#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "covertq/analytics.hpp"
#include "covertq/params.hpp"
#include "covertq/simqueue.hpp"

namespace covertq {

// Willie's matched detector: the statistic he computes and the parameters he assumes.
struct DetectorSpec {
    Statistic statistic = Statistic::YV;
    double assumed_q = 0.0;
    std::optional<BatchPMF> batch;      // II-A batch law
    std::optional<double> pi_j;         // II-A probability that the random job is first in its W-BP
    std::optional<double> geometric_a;  // geometric II-A: ratios use the Exp(a mu2) aggregate

    DetectorSpec with_q(double q) const;
};

// One observation per W-BP. For Y-only statistics v is ignored; for
// IIA_RandomJob y holds the reconstructed service of the randomly picked job.
struct Observation {
    double y = 0.0;
    double v = 0.0;
};

// Per-sample log f1/f0 for a fixed detector. Not thread-safe (keeps a clamp counter);
// give each thread its own instance.
class LikelihoodRatio {
public:
    LikelihoodRatio(const DetectorSpec& spec, const SystemParams& sp);

    double log_ratio(const Observation& obs) const;
    double ratio(const Observation& obs) const;
    std::uint64_t clamped() const { return clamped_; }
    bool degenerate() const { return degenerate_; }

private:
    DetectorSpec spec_;
    SystemParams sp_;
    std::optional<IIQuantities> ii_;
    std::optional<IIAWeight> iia_;
    bool degenerate_ = false;
    mutable std::uint64_t clamped_ = 0;
};

// Sum of per-sample log-likelihood ratios. Ratios below 1e-300 are clamped and counted.
double loglr(const DetectorSpec& spec, const SystemParams& sp, std::span<const Observation> obs,
             std::uint64_t* clamped = nullptr);

enum class Hypothesis { H0, H1 };

// H1 iff llr > 0; ties go to H0.
Hypothesis decide(double llr);

// Turns one W-BP into the observation the statistic needs. rng is used only by IIA_RandomJob.
Observation observe(Statistic stat, const BusyPeriodObs& bp, Rng& rng);

struct PEEstimate {
    double p_fa = 0.0;
    double p_md = 0.0;
    double p_e = 0.0;
    std::uint64_t trials = 0;     // per hypothesis
    double ci_halfwidth = 0.0;    // 95% normal approximation on p_fa + p_md
    std::uint64_t clamped = 0;    // per-sample ratios clamped at 1e-300
    std::optional<double> pi_j_used;
};

// Runs `trials` simulations under H0 (no insertion) and `trials` under H1 (policy),
// each of n_bps W-BPs, and applies the matched optimal test. threads == 0 uses all cores.
PEEstimate estimate_pe(const SystemParams& sp, const Policy& policy, const DetectorSpec& spec, std::uint64_t n_bps,
                       std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace covertq
