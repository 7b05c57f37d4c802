#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covertq/analytics.hpp"
#include "covertq/detect.hpp"
#include "covertq/simqueue.hpp"

namespace covertq {

// Scaling phi(n) in q(n) = delta / phi(n).
struct Phi {
    enum class Kind { Sqrt, SqrtNLogN, Power, Const };
    Kind kind = Kind::Sqrt;
    double gamma = 0.5;  // Power
    double c = 1.0;      // Const

    double operator()(double n) const;
    // Growth exponent of T(n) = n q(n) and whether a 1/sqrt(log n) factor is present.
    double throughput_exponent() const;
    std::string name() const;
};

struct ScalingSpec {
    Phi phi;
    double delta = 0.1;
    std::vector<std::uint64_t> n_grid{100, 316, 1000, 3162, 10000};
    std::uint64_t trials_per_point = 400;
    std::uint64_t base_seed = 1;

    double q_at(std::uint64_t n) const { return delta / phi(static_cast<double>(n)); }
    void validate() const;
};

struct SweepRow {
    std::uint64_t n = 0;
    double q = 0.0;
    double t_n = 0.0;
    double p_e = 0.0;
    double p_e_ci = 0.0;
    double p_fa = 0.0;
    double p_md = 0.0;
    double mean_sqrt_z = 1.0;
    double hellinger_n = 0.0;
    double pe_lower = 1.0;
    std::string regime;
};

// Regime predicted by the exponential-case phase transition for this scaling:
// "covert", "detectable", or "unclassified" outside the exp/exp IEBP/II setting.
std::string regime_label(const SystemParams& sp, const Policy& policy, const Phi& phi);

// One row per n: simulated P_E of the matched detector next to the Hellinger bound at q(n).
std::vector<SweepRow> sweep(const SystemParams& sp, const Policy& policy_family, const ScalingSpec& spec,
                            const DetectorSpec& detector, unsigned threads = 0);

inline constexpr const char* kSweepColumns = "n,q,t_n,p_e,p_e_ci,p_fa,p_md,mean_sqrt_z,hellinger_n,pe_lower,regime";

// CSV text; the optional first line is a '#'-prefixed timestamp comment.
std::string sweep_csv(const std::vector<SweepRow>& rows, bool timestamp_header = true);

// Binned comparison of simulated (Y, V) against the density the policy induces.
struct YVHistogram {
    std::vector<double> y_edges;  // last edge is +inf
    std::vector<double> v_edges;
    std::vector<double> observed;     // row-major, y index major
    std::vector<double> expected;     // expected counts under the policy's density f1
    std::vector<double> expected_h0;  // expected counts under f0
    std::uint64_t n = 0;
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 0.0;
    double max_abs_z = 0.0;  // largest |observed - expected| / binomial sd
};

// Quantile edges of g1 for y and of Exp(lambda) for v.
YVHistogram yv_histogram(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed,
                         int y_bins, int v_bins);

enum class VerifyWhich { TW, CycleCounts, YVDensity, Expansion, C0 };
VerifyWhich verify_which_from_string(const std::string& name);
std::string to_string(VerifyWhich w);

struct VerifyEntry {
    std::string name;
    double analytic = 0.0;
    double measured = 0.0;
    double discrepancy = 0.0;  // relative unless noted in the name
    double tolerance = 0.0;
    bool pass = false;
    bool informational = false;  // reported but not part of the verdict
};

struct VerifyReport {
    std::string which;
    std::vector<VerifyEntry> entries;
    std::vector<std::string> notes;
    bool pass() const;
};

struct VerifyOptions {
    std::uint64_t n_bps = 100000;
    std::uint64_t seed = 1;
    double theta = 1e-3;
};

VerifyReport verify(const SystemParams& sp, const Policy& policy, VerifyWhich which, const VerifyOptions& opt = {});

}  // namespace covertq
