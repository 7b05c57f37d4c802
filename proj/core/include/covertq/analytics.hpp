#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covertq/params.hpp"
#include "covertq/quadrature.hpp"

namespace covertq {

enum class Statistic { YV, YOnly, II_YV, II_YOnly, IIA_RandomJob };

std::string to_string(Statistic s);
Statistic statistic_from_string(const std::string& name);

// sqrt(1 + t) - 1 - t/2 evaluated without cancellation.
double sqrt1p_dev(double t);

// Xi(theta, x) for exponential laws with mu = mu2 and r = mu1/mu2:
// 1 + theta (mu x - 1) when r = 1, else 1 + theta (exp((r-1) mu x)/(r-1) - beta).
double xi_bracket(double x, double mu, double r);
double big_xi(double theta, double x, double mu, double r);

// h-hat_2(t) = int lambda exp(-lambda v) g2(v + t) dv, in closed form per family.
double g2_hat(const SystemParams& sp, double t);

// (g1 * h)(x) / g1(x), the convolution ratio behind every density ratio.
double conv_ratio(const ServiceDist& g1, const ServiceDist& h, double x);

// rho(x, v) such that Z(q, x, v) = 1 + q rho(x, v).
double rho(const SystemParams& sp, double x, double v);
// Y-only counterpart: (g1 * g2-hat)(y) / g1(y) - p.
double rho_y(const SystemParams& sp, double y);
double expected_rho(const SystemParams& sp);

bool c0_finite(const SystemParams& sp);

struct C0Result {
    bool finite = false;
    double value = 0.0;   // valid when finite
    GrowthCurve growth;   // filled when the verdict is divergence
};
C0Result c0(const SystemParams& sp);

// E_0[sqrt(ratio)] and its deficit 1 - E_0[sqrt(ratio)] for the given statistic.
// IIA_RandomJob is served by mean_sqrt_w below.
double mean_sqrt_z(const SystemParams& sp, double q, Statistic stat);
double mean_sqrt_z_deficit(const SystemParams& sp, double q, Statistic stat);

struct DetectabilityReport {
    double mean_sqrt_z = 1.0;
    double hellinger_n = 0.0;
    double tv_lower = 0.0;
    double tv_upper = 0.0;
    double pe_lower = 1.0;
};
DetectabilityReport detectability_from_deficit(double deficit, std::uint64_t n);
DetectabilityReport detectability(const SystemParams& sp, double q, std::uint64_t n, Statistic stat);

// Small-theta expansion of E[sqrt(Xi(theta, X_r))] with X_r ~ Exp(r mu).
struct ExpansionTerms {
    double theta = 0.0;
    double r = 0.0;
    std::optional<double> xi;      // xi_r(theta); absent for r in [1, 2)
    std::optional<double> i_beta;  // I_beta, r > 2 only
    std::optional<double> f_r;     // leading-order term; absent for r in [1, 2)
    double mean_sqrt_xi_exact = 1.0;
    double mean_sqrt_xi_dev = 0.0;  // mean_sqrt_xi_exact - 1 carried at full relative precision
};
ExpansionTerms expansion(double theta, double r);
// E[sqrt(Xi(theta, X_r))] - 1 by quadrature.
double mean_sqrt_xi_dev(double theta, double r);
// I_beta = beta int_0^inf (1 + t/2 - sqrt(1+t)) / t^(beta+1) dt, beta in (1, 2).
double i_beta(double beta);
// theta^2 coefficient for r < 1 obtained from the second-order expansion, -r / (8 (2 - r)).
double small_r_coefficient(double r);
// theta^2 coefficient for r < 1 in the reference closed form, (1 - r) / (4 (r - 2)).
double reference_small_r_coefficient(double r);

struct TwResult {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double mean_interference_work = 0.0;  // int t g2-hat(t) dt
};
TwResult t_w(const SystemParams& sp, double q, std::uint64_t n);

// II policy density ratios (g2 exponential).
class IIQuantities {
public:
    IIQuantities(const SystemParams& sp, double q);
    // f_{+,1}(x, v) / f_0(x, v) = 1 + q exp(-mu2 qbar v) (K(x) - 1).
    double density_ratio(double x, double v) const;
    // Y-only ratio 1 + (p q / (1 - pbar q)) (K(x) - 1).
    double density_ratio_y(double x) const;
    // Expected insertions over n W-BPs: n q / (1 - pbar q).
    double t_plus(std::uint64_t n) const;
    double y_factor() const { return y_factor_; }

private:
    SystemParams sp_;
    double q_;
    double y_factor_;
};
IIQuantities ii_quantities(const SystemParams& sp, double q);

// II-A random-job density ratio W(q, x) = Delta1 + Delta2 Phi1(x) + q Phi2(x).
class IIAWeight {
public:
    IIAWeight(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j);

    double operator()(double x) const;
    double delta1() const { return delta1_; }
    double delta2() const { return delta2_; }
    double phi1(double x) const;
    double phi2(double x) const;
    // Derivative of W at q = 0: alpha + beta_w Phi1(x) + Phi2(x).
    double derivative_at_zero(double x) const;
    double alpha() const { return alpha_; }
    double beta_w() const { return beta_w_; }
    // (g1 * h_s)(x) / g1(x) with h_s the s-stage Erlang(mu2) density.
    double erlang_conv_ratio(std::size_t s, double x) const;

private:
    SystemParams sp_;
    double q_;
    BatchPMF Q_;
    double pi_j_;
    double delta1_ = 1.0, delta2_ = 0.0, alpha_ = 0.0, beta_w_ = 0.0;
    std::vector<double> phi2_coeff_;  // index s: coefficient of the s-stage ratio in Phi2
};

// Stability limit q0 = (1 - rho1) / (rho2 B) for II-A.
double iia_q0(const SystemParams& sp, const BatchPMF& Q);
double iia_w(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j, double x);
// F(q) = int g1 sqrt(W) by direct quadrature.
double iia_f(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j);
// 1 - F(q) evaluated through the mean-one identity.
double iia_deficit(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j);
// c0 = F''(0) / 2 = -(1/8) int g1 (alpha + beta_w Phi1 + Phi2)^2.
double iia_c0(const SystemParams& sp, const BatchPMF& Q, double pi_j);

struct CycleCounts {
    double e_nw = 0.0;           // expected Willie jobs per cycle
    double e_na = 0.0;           // expected Alice jobs per cycle
    double q0 = 0.0;
    double e_na_idle = 0.0;      // Alice jobs inserted during the Willie idle period
    double interference_work = 0.0;  // sum_s s P(E_s): Alice jobs ahead of the first Willie job
    double e_nw_reference = 0.0;   // reference closed form
    double e_na_reference = 0.0;
};
CycleCounts iia_cycle_counts(const SystemParams& sp, double q, const BatchPMF& Q);

struct DoubleSum {
    double lhs = 0.0;
    double rhs = 0.0;
};
DoubleSum double_sum_identity(const BatchPMF& Q, double p);

// Parameters of the exponential aggregate used for geometric II-A batches:
// g2 replaced by Exp(a mu2).
SystemParams geometric_batch_params(const SystemParams& sp, double a);

}  // namespace covertq
