#include "covertq/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "covertq/errors.hpp"

namespace covertq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this log-density the service law contributes nothing representable.
constexpr double kLogUnderflow = -740.0;

void require_q(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("q must lie in [0, 1]");
}

double log_sum_exp(const std::vector<double>& terms) {
    double top = -kInf;
    for (double t : terms) top = std::max(top, t);
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - top);
    return top + std::log(s);
}

// log(exp(a) - 1) for a > 0, stable for small and large a.
double log_expm1(double a) { return a > 30.0 ? a + std::log1p(-std::exp(-a)) : std::log(std::expm1(a)); }

// J_s(d, x) = int_0^x u^(s-1) exp(-d u) du for integer s >= 1 and any real d.
double lower_gamma_integral(int s, double d, double x) {
    if (x <= 0.0) return 0.0;
    if (d == 0.0) return std::pow(x, s) / s;
    if (d > 0.0) return std::tgamma(static_cast<double>(s)) * boost::math::gamma_p(static_cast<double>(s), d * x) / std::pow(d, s);
    // d < 0: every term of the power series is positive.
    const double ax = -d * x;
    double term = std::pow(x, s);  // x^s (a x)^j / j!
    double sum = term / s;
    for (int j = 1; j < 100000; ++j) {
        term *= ax / j;
        const double add = term / (s + j);
        sum += add;
        if (!std::isfinite(sum)) return kInf;
        if (j > ax && add < 1e-17 * sum) break;
    }
    return sum;
}

// log K_mu(x), where K_mu(x) = int_0^x g1(u) mu exp(-mu (x-u)) du / g1(x).
double log_exp_kernel_ratio(const ServiceDist& g1, double mu, double x) {
    if (x <= 0.0) return -kInf;
    if (const auto* e = std::get_if<Exponential>(&g1.law())) {
        const double d = e->rate - mu;
        if (d == 0.0) return std::log(mu * x);
        if (d > 0.0) return std::log(mu / d) + log_expm1(d * x);
        return std::log(mu * -std::expm1(d * x) / -d);
    }
    if (const auto* h = std::get_if<HyperExponential>(&g1.law())) {
        std::vector<double> terms;
        for (const auto& b : h->branches) {
            if (b.weight <= 0.0) continue;
            const double nu = b.rate;
            double l;  // log((exp(-nu x) - exp(-mu x)) / (mu - nu))
            if (nu < mu) {
                l = -nu * x + std::log(-std::expm1(-(mu - nu) * x)) - std::log(mu - nu);
            } else if (nu > mu) {
                l = -mu * x + std::log(-std::expm1(-(nu - mu) * x)) - std::log(nu - mu);
            } else {
                l = std::log(x) - mu * x;
            }
            terms.push_back(std::log(b.weight * nu * mu) + l);
        }
        return log_sum_exp(terms) - g1.log_pdf(x);
    }
    const auto& er = std::get<Erlang>(g1.law());
    const int k = er.stages;
    const double d = er.stage_rate - mu;
    if (d > 0.0) {
        // K = mu exp(d x) J_k(d, x) / x^(k-1)
        return d * x + std::log(mu) + std::log(lower_gamma_integral(k, d, x)) - (k - 1) * std::log(x);
    }
    // K = mu x int_0^1 (1-s)^(k-1) exp(d x s) ds, bounded integrand
    auto f = [k, d, x](double s) { return std::pow(1.0 - s, k - 1) * std::exp(d * x * s); };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    return std::log(mu * x * quad(f, 0.0, 1.0, opt));
}

double exp_kernel_ratio(const ServiceDist& g1, double mu, double x) { return std::exp(log_exp_kernel_ratio(g1, mu, x)); }

// int_0^x exp(log g1(u) - log g1(x)) k(x - u) du for a generic kernel.
template <class Kernel>
double generic_conv_ratio(const ServiceDist& g1, Kernel&& kernel, double x) {
    if (x <= 0.0) return 0.0;
    const double lgx = g1.log_pdf(x);
    if (!std::isfinite(lgx)) throw DomainError("convolution ratio requested where g1 vanishes");
    auto f = [&](double u) {
        const double k = kernel(x - u);
        if (k <= 0.0) return 0.0;
        return std::exp(g1.log_pdf(u) - lgx + std::log(k));
    };
    QuadOptions opt;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-15;
    return quad(f, 0.0, x, opt);
}

// Integral of f against g1 over [0, inf), skipping the region where g1 underflows.
template <class F>
double expect_g1(const ServiceDist& g1, F&& f, QuadOptions opt = {}) {
    opt.scale = g1.mean();
    auto integrand = [&](double x) {
        const double lg = g1.log_pdf(x);
        if (lg < kLogUnderflow) return 0.0;
        const double v = f(x);
        if (v == 0.0) return 0.0;
        return std::exp(lg) * v;
    };
    return quad_inf(integrand, 0.0, opt);
}

// Integral of f against lambda exp(-lambda v) over [0, inf).
template <class F>
double expect_v(double lambda, F&& f, QuadOptions opt = {}) {
    opt.scale = 1.0 / lambda;
    auto integrand = [&](double v) {
        const double lv = -lambda * v;
        if (lv < kLogUnderflow) return 0.0;
        const double val = f(v);
        if (val == 0.0) return 0.0;
        return lambda * std::exp(lv) * val;
    };
    return quad_inf(integrand, 0.0, opt);
}

QuadOptions inner_options() {
    QuadOptions o;
    o.rel_tol = 1e-11;
    o.abs_tol = 1e-16;
    return o;
}

// K_l(x) - 1 for every branch of an exponential-mixture g2.
std::vector<double> branch_offsets(const SystemParams& sp, const std::vector<HyperExponential::Branch>& mix, double x) {
    std::vector<double> out;
    out.reserve(mix.size());
    for (const auto& b : mix) out.push_back(exp_kernel_ratio(sp.g1, b.rate, x) - 1.0);
    return out;
}

double rho_general_conv(const SystemParams& sp, double x, double v) {
    if (x == 0.0) return 0.0;
    return generic_conv_ratio(sp.g1, [&](double t) { return sp.g2.pdf(v + t); }, x);
}

}  // namespace

std::string to_string(Statistic s) {
    switch (s) {
        case Statistic::YV: return "YV";
        case Statistic::YOnly: return "YOnly";
        case Statistic::II_YV: return "II_YV";
        case Statistic::II_YOnly: return "II_YOnly";
        case Statistic::IIA_RandomJob: return "IIA_RandomJob";
    }
    return "unknown";
}

Statistic statistic_from_string(const std::string& name) {
    if (name == "YV") return Statistic::YV;
    if (name == "YOnly") return Statistic::YOnly;
    if (name == "II_YV") return Statistic::II_YV;
    if (name == "II_YOnly") return Statistic::II_YOnly;
    if (name == "IIA_RandomJob") return Statistic::IIA_RandomJob;
    throw InvalidConfig("unknown statistic '" + name + "'");
}

double sqrt1p_dev(double t) {
    if (t < -1.0) t = -1.0;
    if (t > 1.0) return std::sqrt(1.0 + t) - 1.0 - 0.5 * t;
    return -(0.25 * t * t) / (std::sqrt(1.0 + t) + 1.0 + 0.5 * t);
}

double xi_bracket(double x, double mu, double r) {
    if (r == 1.0) return mu * x - 1.0;
    const double beta = r / (r - 1.0);
    return std::exp((r - 1.0) * mu * x) / (r - 1.0) - beta;
}

double big_xi(double theta, double x, double mu, double r) { return 1.0 + theta * xi_bracket(x, mu, r); }

double g2_hat(const SystemParams& sp, double t) {
    if (!(t >= 0.0)) throw DomainError("g2_hat argument must be nonnegative");
    const double lam = sp.lambda;
    const auto mix = sp.g2.exp_mixture();
    if (!mix.empty()) {
        double s = 0.0;
        for (const auto& b : mix) s += b.weight * lam * b.rate / (lam + b.rate) * std::exp(-b.rate * t);
        return s;
    }
    const auto& er = std::get<Erlang>(sp.g2.law());
    const int k = er.stages;
    const double nu = er.stage_rate;
    // lambda exp(-nu t) sum_j nu^k t^(k-1-j) / ((k-1-j)! (lambda+nu)^(j+1))
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
        const int m = k - 1 - j;
        s += std::exp(k * std::log(nu) + (m > 0 ? m * std::log(t) : 0.0) - std::lgamma(m + 1.0) -
                      (j + 1) * std::log(lam + nu));
    }
    return lam * std::exp(-nu * t) * s;
}

double conv_ratio(const ServiceDist& g1, const ServiceDist& h, double x) {
    if (!(x >= 0.0)) throw DomainError("convolution ratio argument must be nonnegative");
    const auto mix = h.exp_mixture();
    if (!mix.empty()) {
        double s = 0.0;
        for (const auto& b : mix) s += b.weight * exp_kernel_ratio(g1, b.rate, x);
        return s;
    }
    const auto& er = std::get<Erlang>(h.law());
    if (const auto* e = std::get_if<Exponential>(&g1.law())) {
        const int m = er.stages;
        return std::exp(m * std::log(er.stage_rate) - std::lgamma(static_cast<double>(m))) *
               lower_gamma_integral(m, er.stage_rate - e->rate, x);
    }
    if (x == 0.0) return 0.0;
    return generic_conv_ratio(g1, [&](double t) { return h.pdf(t); }, x);
}

double rho(const SystemParams& sp, double x, double v) {
    if (!(x >= 0.0) || !(v >= 0.0)) throw DomainError("rho arguments must be nonnegative");
    if (x == 0.0 && sp.g1.pdf(0.0) == 0.0 && !sp.g1.is_erlang())
        throw DomainError("rho evaluated where g1 vanishes");
    const auto mix = sp.g2.exp_mixture();
    if (!mix.empty()) {
        double s = 0.0;
        for (const auto& b : mix) s += b.weight * std::exp(-b.rate * v) * (exp_kernel_ratio(sp.g1, b.rate, x) - 1.0);
        return s;
    }
    return rho_general_conv(sp, x, v) - sp.g2.sf(v);
}

double rho_y(const SystemParams& sp, double y) {
    if (!(y >= 0.0)) throw DomainError("rho_y argument must be nonnegative");
    const auto mix = sp.g2.exp_mixture();
    if (!mix.empty()) {
        double s = 0.0;
        for (const auto& b : mix)
            s += b.weight * sp.lambda / (sp.lambda + b.rate) * (exp_kernel_ratio(sp.g1, b.rate, y) - 1.0);
        return s;
    }
    if (y == 0.0) return -sp.p;
    return generic_conv_ratio(sp.g1, [&](double t) { return g2_hat(sp, t); }, y) - sp.p;
}

double expected_rho(const SystemParams& sp) {
    QuadOptions outer;
    outer.abs_tol = 1e-11;
    QuadOptions inner = inner_options();
    inner.abs_tol = 1e-13;
    try {
        return expect_g1(sp.g1, [&](double x) { return expect_v(sp.lambda, [&](double v) { return rho(sp, x, v); }, inner); },
                         outer);
    } catch (const NumericError& e) {
        throw NumericError(std::string("expected_rho: ") + e.what() + " [" + sp.g1.describe() + ", " +
                           sp.g2.describe() + "]");
    }
}

bool c0_finite(const SystemParams& sp) {
    const bool g1_mix = sp.g1.is_exponential() || sp.g1.is_hyperexp();
    const bool g2_mix = sp.g2.is_exponential() || sp.g2.is_hyperexp();
    if (sp.g1.is_exponential() && sp.g2.is_exponential()) return sp.mu1 < 2.0 * sp.mu2;
    if (g1_mix && g2_mix) return sp.g1.max_rate() <= 2.0 * sp.g2.min_rate();
    if (sp.g1.is_erlang() && g2_mix) return sp.g1.min_rate() < 2.0 * sp.g2.min_rate();
    throw UnsupportedCombination("finiteness of C0 is characterised only for exponential or hyper-exponential g2 (" +
                                 sp.g1.describe() + ", " + sp.g2.describe() + ")");
}

C0Result c0(const SystemParams& sp) {
    // g1(x) * E_V[rho(x, V)^2], assembled in log space so that growing kernel
    // ratios never meet an underflowed density.
    std::function<double(double)> weighted;
    const auto mix = sp.g2.exp_mixture();
    if (!mix.empty()) {
        weighted = [&sp, mix](double x) {
            const double lg = sp.g1.log_pdf(x);
            if (!std::isfinite(lg)) return 0.0;
            std::vector<double> la(mix.size());
            std::vector<int> sign(mix.size());
            for (std::size_t l = 0; l < mix.size(); ++l) {
                const double lk = log_exp_kernel_ratio(sp.g1, mix[l].rate, x);
                if (lk > 0.0) {
                    la[l] = log_expm1(lk);
                    sign[l] = 1;
                } else {
                    const double a = std::expm1(lk);  // in [-1, 0]
                    la[l] = a == 0.0 ? -kInf : std::log(-a);
                    sign[l] = -1;
                }
            }
            double s = 0.0;
            for (std::size_t l = 0; l < mix.size(); ++l)
                for (std::size_t m = 0; m < mix.size(); ++m) {
                    const double c = mix[l].weight * mix[m].weight * sp.lambda / (sp.lambda + mix[l].rate + mix[m].rate);
                    if (c == 0.0) continue;
                    s += sign[l] * sign[m] * c * std::exp(lg + la[l] + la[m]);
                }
            return s;
        };
    } else {
        weighted = [&sp](double x) {
            const double lg = sp.g1.log_pdf(x);
            if (lg < kLogUnderflow) return 0.0;
            const double m2 = expect_v(
                sp.lambda, [&](double v) { const double r = rho(sp, x, v); return r * r; }, inner_options());
            return std::exp(lg + std::log(m2));
        };
    }

    C0Result out;
    bool finite;
    bool decided = true;
    try {
        finite = c0_finite(sp);
    } catch (const UnsupportedCombination&) {
        decided = false;
        finite = true;
    }
    const double min_rate = std::min(sp.g1.min_rate(), sp.g2.min_rate());
    if (!decided) {
        out.growth = truncated_growth(weighted, 0.0, min_rate);
        finite = !out.growth.diverges;
    }
    if (!finite) {
        if (out.growth.cutoffs.empty()) out.growth = truncated_growth(weighted, 0.0, min_rate);
        out.finite = false;
        return out;
    }
    QuadOptions opt;
    opt.scale = sp.g1.mean();
    opt.max_intervals = 4000;
    out.value = quad_inf(weighted, 0.0, opt);
    out.finite = true;
    return out;
}

double mean_sqrt_z_deficit(const SystemParams& sp, double q, Statistic stat) {
    require_q(q);
    if (q == 0.0) return 0.0;
    const double q2 = q * q;
    // Integrands carry dev(q * rho) / q^2 so that the relative tolerance applies to the deficit itself.
    auto dev = [q, q2](double t) { return sqrt1p_dev(q * t) / q2; };
    const QuadOptions inner = inner_options();
    double e = 0.0;
    switch (stat) {
        case Statistic::YV: {
            const auto mix = sp.g2.exp_mixture();
            if (!mix.empty()) {
                e = expect_g1(sp.g1, [&](double x) {
                    const auto off = branch_offsets(sp, mix, x);
                    return expect_v(sp.lambda, [&](double v) {
                        double r = 0.0;
                        for (std::size_t l = 0; l < mix.size(); ++l) r += mix[l].weight * std::exp(-mix[l].rate * v) * off[l];
                        return dev(r);
                    }, inner);
                });
            } else {
                e = expect_g1(sp.g1, [&](double x) {
                    return expect_v(sp.lambda, [&](double v) { return dev(rho(sp, x, v)); }, inner);
                });
            }
            break;
        }
        case Statistic::YOnly:
            e = expect_g1(sp.g1, [&](double x) { return dev(rho_y(sp, x)); });
            break;
        case Statistic::II_YV: {
            if (!sp.g2.is_exponential()) throw UnsupportedCombination("II statistics require exponential g2");
            const double decay = sp.mu2 * (1.0 - q);
            e = expect_g1(sp.g1, [&](double x) {
                const double k1 = exp_kernel_ratio(sp.g1, sp.mu2, x) - 1.0;
                return expect_v(sp.lambda, [&](double v) { return dev(std::exp(-decay * v) * k1); }, inner);
            });
            break;
        }
        case Statistic::II_YOnly: {
            if (!sp.g2.is_exponential()) throw UnsupportedCombination("II statistics require exponential g2");
            const double factor = sp.p / (1.0 - sp.pbar() * q);
            e = expect_g1(sp.g1, [&](double x) { return dev(factor * (exp_kernel_ratio(sp.g1, sp.mu2, x) - 1.0)); });
            break;
        }
        case Statistic::IIA_RandomJob:
            throw UnsupportedCombination("IIA_RandomJob needs a batch law and pi_J; use iia_deficit");
    }
    return -e * q2;
}

double mean_sqrt_z(const SystemParams& sp, double q, Statistic stat) { return 1.0 - mean_sqrt_z_deficit(sp, q, stat); }

DetectabilityReport detectability_from_deficit(double deficit, std::uint64_t n) {
    if (n < 1) throw DomainError("n must be >= 1");
    DetectabilityReport rep;
    deficit = std::clamp(deficit, 0.0, 1.0);
    rep.mean_sqrt_z = 1.0 - deficit;
    // 1 - (1 - deficit)^n without cancellation
    rep.hellinger_n = deficit >= 1.0 ? 1.0 : -std::expm1(static_cast<double>(n) * std::log1p(-deficit));
    rep.tv_lower = rep.hellinger_n;
    rep.tv_upper = std::min(1.0, std::sqrt(2.0 * rep.hellinger_n));
    rep.pe_lower = 1.0 - rep.tv_upper;
    return rep;
}

DetectabilityReport detectability(const SystemParams& sp, double q, std::uint64_t n, Statistic stat) {
    if (n < 1) throw DomainError("n must be >= 1");
    return detectability_from_deficit(mean_sqrt_z_deficit(sp, q, stat), n);
}

double mean_sqrt_xi_dev(double theta, double r) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
    if (!(r > 0.0)) throw DomainError("r must be positive");
    if (std::abs(r - 1.0) < 1e-9) r = 1.0;
    if (theta == 0.0) return 0.0;
    const double t2 = theta * theta;
    const double cut = r > 1.0 ? std::min(745.0 / r, 700.0 / (r - 1.0)) : 745.0 / r;
    auto f = [&](double x) {
        if (x > cut) return 0.0;
        return r * std::exp(-r * x) * sqrt1p_dev(theta * xi_bracket(x, 1.0, r)) / t2;
    };
    QuadOptions opt;
    opt.scale = 1.0 / r;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-30;
    opt.max_intervals = 5000;
    return quad_inf(f, 0.0, opt) * t2;
}

double i_beta(double beta) {
    if (!(beta > 1.0 && beta < 2.0)) throw DomainError("I_beta is defined for beta in (1, 2)");
    // Integrand (1 + t/2 - sqrt(1+t)) / t^(beta+1) = t^(1-beta) / (4 (1 + t/2 + sqrt(1+t))).
    // On [0,1] substitute t = u^k with k = 1/(2-beta); on [1,inf) substitute t = w^(-m)
    // with m = 1/(beta-1). Both leave smooth integrands on [0,1].
    const double k = 1.0 / (2.0 - beta);
    const double m = 1.0 / (beta - 1.0);
    auto head = [&](double u) {
        if (u == 0.0) return k / 8.0;
        const double t = std::pow(u, k);
        return k / (4.0 * (1.0 + 0.5 * t + std::sqrt(1.0 + t)));
    };
    auto tail = [&](double w) {
        // f(t) * dt/dw with t = w^(-m): m * t^(2-beta) / (4 w (1 + t/2 + sqrt(1+t))), written in s = 1/t = w^m.
        if (w == 0.0) return m / 2.0;
        const double s = std::pow(w, m);
        return m / (4.0 * (s + 0.5 + std::sqrt(s * s + s)));
    };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    return beta * (quad(head, 0.0, 1.0, opt) + quad(tail, 0.0, 1.0, opt));
}

double small_r_coefficient(double r) { return -r / (8.0 * (2.0 - r)); }

double reference_small_r_coefficient(double r) { return (1.0 - r) / (4.0 * (r - 2.0)); }

ExpansionTerms expansion(double theta, double r) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
    if (!(r > 0.0)) throw DomainError("r must be positive");
    if (std::abs(r - 1.0) < 1e-9) r = 1.0;
    ExpansionTerms t;
    t.theta = theta;
    t.r = r;
    t.mean_sqrt_xi_dev = mean_sqrt_xi_dev(theta, r);
    t.mean_sqrt_xi_exact = 1.0 + t.mean_sqrt_xi_dev;
    if (r < 1.0) {
        const double beta = r / (r - 1.0);
        t.xi = (1.0 - beta) * theta / (1.0 - theta * beta);
        t.f_r = small_r_coefficient(r) * theta * theta;
    } else if (r >= 2.0) {
        const double beta = r / (r - 1.0);
        if (beta * theta < 1.0) {
            const double xi = (beta - 1.0) * theta / (1.0 - beta * theta);
            t.xi = xi;
            if (r == 2.0) {
                t.f_r = xi > 0.0 ? 0.25 * xi * xi * std::log(xi) : 0.0;
            } else {
                t.i_beta = i_beta(beta);
                t.f_r = -*t.i_beta * std::pow(xi, beta);
            }
        } else if (r > 2.0) {
            t.i_beta = i_beta(beta);
        }
    }
    return t;
}

TwResult t_w(const SystemParams& sp, double q, std::uint64_t n) {
    require_q(q);
    if (n < 1) throw DomainError("n must be >= 1");
    TwResult out;
    QuadOptions opt;
    opt.scale = sp.g2.mean();
    out.mean_interference_work = quad_inf([&](double t) { return t * g2_hat(sp, t); }, 0.0, opt);
    const double nn = static_cast<double>(n);
    out.value = nn / (1.0 - sp.rho1) + sp.lambda * q * nn / (1.0 - sp.rho1) * out.mean_interference_work;
    out.lower = nn;
    out.upper = nn * (1.0 + q * sp.lambda / sp.mu2) / (1.0 - sp.lambda / sp.mu1);
    return out;
}

IIQuantities::IIQuantities(const SystemParams& sp, double q) : sp_(sp), q_(q) {
    require_q(q);
    if (!sp.g2.is_exponential()) throw UnsupportedCombination("II policy formulas require exponential g2");
    y_factor_ = sp.p * q / (1.0 - sp.pbar() * q);
}

double IIQuantities::density_ratio(double x, double v) const {
    if (q_ == 0.0) return 1.0;
    return 1.0 + q_ * std::exp(-sp_.mu2 * (1.0 - q_) * v) * (exp_kernel_ratio(sp_.g1, sp_.mu2, x) - 1.0);
}

double IIQuantities::density_ratio_y(double x) const {
    if (q_ == 0.0) return 1.0;
    return 1.0 + y_factor_ * (exp_kernel_ratio(sp_.g1, sp_.mu2, x) - 1.0);
}

double IIQuantities::t_plus(std::uint64_t n) const { return static_cast<double>(n) * q_ / (1.0 - sp_.pbar() * q_); }

IIQuantities ii_quantities(const SystemParams& sp, double q) { return IIQuantities(sp, q); }

double iia_q0(const SystemParams& sp, const BatchPMF& Q) {
    const double B = Q.mean();
    if (B == 0.0) return kInf;
    return (1.0 - sp.rho1) / (sp.rho2 * B);
}

IIAWeight::IIAWeight(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j)
    : sp_(sp), q_(q), Q_(Q), pi_j_(pi_j) {
    require_q(q);
    if (!sp.g2.is_exponential()) throw UnsupportedCombination("II-A formulas require exponential g2");
    if (!(pi_j >= 0.0 && pi_j <= 1.0)) throw DomainError("pi_J must lie in [0, 1]");
    const double q0 = iia_q0(sp, Q);
    if (!(q < q0)) {
        std::ostringstream os;
        os << "II-A unstable: q = " << q << " >= q0 = " << q0;
        throw StabilityError(os.str());
    }
    const double p = sp.p;
    const double pb = sp.pbar();
    const double G = Q.generating(pb);
    const double Q0 = Q(0);
    const double Q0bar = Q.tail0();
    const double pj = pi_j;
    const double pjb = 1.0 - pi_j;
    const double qb = 1.0 - q;

    delta1_ = qb / (1.0 - q * pb) * (qb + q * G) * pj + (1.0 - q * Q0bar) * pjb;
    delta2_ = q * (pb * (1.0 - q * Q0bar) + G - Q0) / (pb * (1.0 - q * pb));
    alpha_ = -(p + (1.0 - G)) * pj - Q0bar * pjb;
    beta_w_ = 1.0 + (G - Q0) / pb;

    const std::size_t S = Q.max_size();
    phi2_coeff_.assign(S + 1, 0.0);
    for (std::size_t s = 1; s <= S; ++s) {
        double tail = 0.0;  // sum_{l >= s} Q(l) pbar^(l-s)
        if (s >= 2)
            for (std::size_t l = S + 1; l-- > s;) tail = tail * pb + Q(l);
        phi2_coeff_[s] = (s >= 2 ? p * pj * tail : 0.0) + pjb * Q(s);
    }
}

double IIAWeight::erlang_conv_ratio(std::size_t s, double x) const {
    if (s == 1) return exp_kernel_ratio(sp_.g1, sp_.mu2, x);
    return conv_ratio(sp_.g1, ServiceDist::erlang(static_cast<int>(s), sp_.mu2), x);
}

double IIAWeight::phi1(double x) const { return sp_.p * pi_j_ * erlang_conv_ratio(1, x); }

double IIAWeight::phi2(double x) const {
    double s = 0.0;
    for (std::size_t k = 1; k < phi2_coeff_.size(); ++k)
        if (phi2_coeff_[k] != 0.0) s += phi2_coeff_[k] * erlang_conv_ratio(k, x);
    return s;
}

double IIAWeight::operator()(double x) const {
    if (q_ == 0.0) return 1.0;
    return delta1_ + delta2_ * phi1(x) + q_ * phi2(x);
}

double IIAWeight::derivative_at_zero(double x) const { return alpha_ + beta_w_ * phi1(x) + phi2(x); }

double iia_w(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j, double x) {
    if (!(x >= 0.0)) throw DomainError("x must be nonnegative");
    return IIAWeight(sp, q, Q, pi_j)(x);
}

double iia_f(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j) {
    const IIAWeight w(sp, q, Q, pi_j);
    QuadOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-15;
    opt.max_intervals = 4000;
    return expect_g1(sp.g1, [&](double x) { return std::sqrt(std::max(0.0, w(x))); }, opt);
}

double iia_deficit(const SystemParams& sp, double q, const BatchPMF& Q, double pi_j) {
    if (q == 0.0) return 0.0;
    const IIAWeight w(sp, q, Q, pi_j);
    const double q2 = q * q;
    return -q2 * expect_g1(sp.g1, [&](double x) { return sqrt1p_dev(w(x) - 1.0) / q2; });
}

double iia_c0(const SystemParams& sp, const BatchPMF& Q, double pi_j) {
    if (!sp.exp_exp()) throw UnsupportedCombination("iia_c0 requires exponential g1 and g2");
    if (!(sp.mu1 < 2.0 * sp.mu2)) throw DivergenceError("F''(0) diverges: mu1 >= 2 mu2");
    const IIAWeight w(sp, 0.0, Q, pi_j);
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    const double integral = expect_g1(sp.g1, [&](double x) { const double d = w.derivative_at_zero(x); return d * d; }, opt);
    return -integral / 8.0;
}

CycleCounts iia_cycle_counts(const SystemParams& sp, double q, const BatchPMF& Q) {
    require_q(q);
    CycleCounts c;
    c.q0 = iia_q0(sp, Q);
    if (!(q < c.q0)) {
        std::ostringstream os;
        os << "II-A unstable: q = " << q << " >= q0 = " << c.q0;
        throw StabilityError(os.str());
    }
    const double p = sp.p;
    const double pb = sp.pbar();
    const double qb = 1.0 - q;
    const double G = Q.generating(pb);
    const double Q0 = Q(0);
    const double Q0bar = Q.tail0();
    const double B = Q.mean();
    const double denom = 1.0 - sp.rho1 - q * sp.rho2 * B;

    // P(E_s): s Alice jobs are ahead of the first Willie job of a W-BP.
    const double pe1 = q * p / (1.0 - q * pb) * (qb + q * Q0 + (G - Q0) / pb);
    double work = pe1;
    const std::size_t S = Q.max_size();
    for (std::size_t s = 2; s <= S; ++s) {
        double tail = 0.0;
        for (std::size_t l = S + 1; l-- > s;) tail = tail * pb + Q(l);
        work += static_cast<double>(s) * q * p * tail;
    }
    c.interference_work = work;
    // The batch behind the last Willie job of a W-BP is served after the W-BP ends.
    c.e_nw = (1.0 + sp.rho2 * (work - q * B)) / denom;
    c.e_na_idle = q * (qb + q * G) / (1.0 - q * pb);
    c.e_na = q * B * c.e_nw + c.e_na_idle;

    const double bracket = 1.0 + q * sp.rho2 * p / (1.0 - q * pb) * (1.0 / (1.0 - q * pb) - (1.0 + p) * Q(1) / pb) +
                           q * q * sp.rho2 / (1.0 - q * pb) * (p * B - p / (1.0 - q * p) * (1.0 - G));
    c.e_nw_reference = bracket / denom;
    c.e_na_reference = q * B * c.e_nw_reference + q * (pb * qb + p) / ((1.0 - q * pb) * (1.0 - q * pb)) * (qb * Q0bar + G);
    return c;
}

DoubleSum double_sum_identity(const BatchPMF& Q, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
    const double pb = 1.0 - p;
    DoubleSum d;
    const std::size_t S = Q.max_size();
    for (std::size_t s = 2; s <= S; ++s)
        for (std::size_t l = s; l <= S; ++l) d.lhs += Q(l) * std::pow(pb, static_cast<double>(l - s));
    const double G = Q.generating(pb);
    d.rhs = (1.0 - pb * G) / p - (G * (1.0 + pb) - Q(0)) / pb;
    return d;
}

SystemParams geometric_batch_params(const SystemParams& sp, double a) {
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("geometric continuation parameter a must lie in (0, 1]");
    if (!sp.g2.is_exponential()) throw UnsupportedCombination("geometric batches require exponential g2");
    return SystemParams::make(sp.lambda, sp.g1, ServiceDist::exponential(a * sp.mu2));
}

}  // namespace covertq
