#include "covertq/detect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "covertq/errors.hpp"
#include "covertq/rng.hpp"

namespace covertq {

namespace {

constexpr double kRatioFloor = 1e-300;

SystemParams ratio_params(const DetectorSpec& spec, const SystemParams& sp) {
    if (spec.geometric_a) return geometric_batch_params(sp, *spec.geometric_a);
    return sp;
}

}  // namespace

DetectorSpec DetectorSpec::with_q(double q) const {
    DetectorSpec d = *this;
    d.assumed_q = q;
    return d;
}

LikelihoodRatio::LikelihoodRatio(const DetectorSpec& spec, const SystemParams& sp)
    : spec_(spec), sp_(ratio_params(spec, sp)) {
    const double q = spec.assumed_q;
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("assumed q must lie in [0, 1]");
    degenerate_ = q == 0.0;
    if (spec.geometric_a && spec.statistic != Statistic::YV && spec.statistic != Statistic::YOnly)
        throw UnsupportedCombination("geometric II-A detectors use the YV or YOnly ratio of the aggregate law");
    switch (spec.statistic) {
        case Statistic::II_YV:
        case Statistic::II_YOnly:
            ii_.emplace(sp_, q);
            break;
        case Statistic::IIA_RandomJob:
            if (!spec.batch) throw InvalidConfig("IIA_RandomJob detector needs a batch law");
            if (!spec.pi_j) throw InvalidConfig("IIA_RandomJob detector needs pi_J");
            iia_.emplace(sp_, q, *spec.batch, *spec.pi_j);
            break;
        default:
            break;
    }
}

double LikelihoodRatio::ratio(const Observation& o) const {
    if (degenerate_) return 1.0;
    const double q = spec_.assumed_q;
    switch (spec_.statistic) {
        case Statistic::YV: return 1.0 + q * rho(sp_, o.y, o.v);
        case Statistic::YOnly: return 1.0 + q * rho_y(sp_, o.y);
        case Statistic::II_YV: return ii_->density_ratio(o.y, o.v);
        case Statistic::II_YOnly: return ii_->density_ratio_y(o.y);
        case Statistic::IIA_RandomJob: return (*iia_)(o.y);
    }
    return 1.0;
}

double LikelihoodRatio::log_ratio(const Observation& o) const {
    if (degenerate_) return 0.0;
    double z = ratio(o);
    if (!(z >= kRatioFloor)) {
        ++clamped_;
        z = kRatioFloor;
    }
    return std::log(z);
}

double loglr(const DetectorSpec& spec, const SystemParams& sp, std::span<const Observation> obs,
             std::uint64_t* clamped) {
    const LikelihoodRatio lr(spec, sp);
    double s = 0.0;
    for (const auto& o : obs) s += lr.log_ratio(o);
    if (clamped) *clamped += lr.clamped();
    return s;
}

Hypothesis decide(double llr) {
    if (!std::isfinite(llr)) throw DomainError("log-likelihood ratio must be finite");
    return llr > 0.0 ? Hypothesis::H1 : Hypothesis::H0;
}

Observation observe(Statistic stat, const BusyPeriodObs& bp, Rng& rng) {
    if (stat == Statistic::IIA_RandomJob) {
        const std::size_t idx = static_cast<std::size_t>(rng.below(bp.n_jobs));
        return {bp.services[idx], bp.v};
    }
    return {bp.y, bp.v};
}

PEEstimate estimate_pe(const SystemParams& sp, const Policy& policy, const DetectorSpec& spec_in, std::uint64_t n_bps,
                       std::uint64_t trials, std::uint64_t seed, unsigned threads) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    policy.validate(sp);
    DetectorSpec spec = spec_in;
    PEEstimate est;
    if (spec.statistic == Statistic::IIA_RandomJob && !spec.pi_j) {
        // Calibrate under the H1 configuration by default.
        spec.pi_j = calibrate_pi_j(sp, policy, 100000, derive_seed(seed, {7}));
    }
    if (spec.pi_j) est.pi_j_used = spec.pi_j;
    // Validate the detector once before spawning workers.
    { const LikelihoodRatio probe(spec, sp); }

    const std::uint64_t jobs = 2 * trials;
    std::vector<std::uint8_t> rejected(jobs, 0);
    std::vector<std::uint64_t> clamps(jobs, 0);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    const Policy h0 = Policy::none();

    auto worker = [&]() {
        try {
            const LikelihoodRatio lr(spec, sp);
            for (std::uint64_t job = next++; job < jobs && !failed; job = next++) {
                const std::uint64_t hyp = job / trials;
                const std::uint64_t trial = job % trials;
                Rng pick(derive_seed(seed, {hyp, trial, 2}));
                double llr = 0.0;
                const std::uint64_t before = lr.clamped();
                simulate(sp, hyp == 0 ? h0 : policy, n_bps, derive_seed(seed, {hyp, trial, 1}),
                         [&](const BusyPeriodObs& bp, const BusyPeriodTruth&) {
                             llr += lr.log_ratio(observe(spec.statistic, bp, pick));
                         });
                rejected[job] = decide(llr) == Hypothesis::H1 ? 1 : 0;
                clamps[job] = lr.clamped() - before;
            }
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };

    unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::uint64_t>(n_threads, jobs));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::uint64_t fa = 0, md = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        fa += rejected[t];
        md += 1 - rejected[trials + t];
    }
    for (auto c : clamps) est.clamped += c;
    const double T = static_cast<double>(trials);
    est.trials = trials;
    est.p_fa = fa / T;
    est.p_md = md / T;
    est.p_e = est.p_fa + est.p_md;
    est.ci_halfwidth = 1.96 * std::sqrt(est.p_fa * (1.0 - est.p_fa) / T + est.p_md * (1.0 - est.p_md) / T);
    return est;
}

}  // namespace covertq
