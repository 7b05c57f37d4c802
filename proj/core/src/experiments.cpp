#include "covertq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <memory>
#include <sstream>

#include "covertq/errors.hpp"
#include "covertq/quadrature.hpp"
#include "covertq/rng.hpp"
#include "covertq/stats.hpp"

namespace covertq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate_range(FunctionRef f, double a, double b, double scale) {
    QuadOptions opt;
    opt.scale = scale;
    if (std::isinf(b)) return quad_inf(f, a, opt);
    return quad(f, a, b, opt);
}

double quantile(const ServiceDist& d, double u) {
    double lo = 0.0, hi = d.mean();
    while (d.cdf(hi) < u) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (d.cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

VerifyEntry relative_entry(std::string name, double analytic, double measured, double tol, bool informational = false) {
    VerifyEntry e;
    e.name = std::move(name);
    e.analytic = analytic;
    e.measured = measured;
    e.discrepancy = analytic != 0.0 ? std::abs(measured - analytic) / std::abs(analytic) : std::abs(measured);
    e.tolerance = tol;
    e.pass = e.discrepancy <= tol;
    e.informational = informational;
    return e;
}

VerifyEntry absolute_entry(std::string name, double analytic, double measured, double tol) {
    VerifyEntry e;
    e.name = std::move(name);
    e.analytic = analytic;
    e.measured = measured;
    e.discrepancy = std::abs(measured - analytic);
    e.tolerance = tol;
    e.pass = e.discrepancy <= tol;
    return e;
}

}  // namespace

double Phi::operator()(double n) const {
    switch (kind) {
        case Kind::Sqrt: return std::sqrt(n);
        case Kind::SqrtNLogN: return std::sqrt(n * std::log(n));
        case Kind::Power: return std::pow(n, gamma);
        case Kind::Const: return c;
    }
    return 1.0;
}

double Phi::throughput_exponent() const {
    switch (kind) {
        case Kind::Sqrt:
        case Kind::SqrtNLogN: return 0.5;
        case Kind::Power: return 1.0 - gamma;
        case Kind::Const: return 1.0;
    }
    return 1.0;
}

std::string Phi::name() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Sqrt: os << "sqrt"; break;
        case Kind::SqrtNLogN: os << "sqrt_nlogn"; break;
        case Kind::Power: os << "power(" << gamma << ")"; break;
        case Kind::Const: os << "const(" << c << ")"; break;
    }
    return os.str();
}

void ScalingSpec::validate() const {
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidConfig("delta must lie in (0, 1]");
    if (n_grid.empty()) throw InvalidConfig("n_grid must not be empty");
    if (phi.kind == Phi::Kind::Power && !(phi.gamma > 0.0 && phi.gamma < 1.0))
        throw InvalidConfig("power scaling needs gamma in (0, 1)");
    if (phi.kind == Phi::Kind::Const && !(phi.c >= 1.0)) throw InvalidConfig("constant scaling needs c >= 1");
    if (trials_per_point < 1) throw InvalidConfig("trials_per_point must be >= 1");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2) throw InvalidConfig("n_grid entries must be >= 2");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw InvalidConfig("n_grid must be strictly increasing");
        const double q = q_at(n_grid[i]);
        if (!(q > 0.0 && q <= 1.0)) throw InvalidConfig("q(n) = delta / phi(n) must lie in (0, 1]");
    }
}

std::string regime_label(const SystemParams& sp, const Policy& policy, const Phi& phi) {
    if (!sp.exp_exp()) return "unclassified";
    if (policy.kind != Policy::Kind::IEBP && policy.kind != Policy::Kind::II) return "unclassified";
    const double tau = phi.throughput_exponent();
    const bool log_damped = phi.kind == Phi::Kind::SqrtNLogN;
    constexpr double eps = 1e-12;
    bool covert;
    if (sp.r < 2.0) {
        covert = tau <= 0.5 + eps;
    } else if (sp.r == 2.0) {
        covert = tau < 0.5 - eps || (std::abs(tau - 0.5) <= eps && log_damped);
    } else {
        covert = tau <= 1.0 / sp.r + eps;
    }
    return covert ? "covert" : "detectable";
}

std::vector<SweepRow> sweep(const SystemParams& sp, const Policy& policy_family, const ScalingSpec& spec,
                            const DetectorSpec& detector, unsigned threads) {
    spec.validate();
    std::vector<SweepRow> rows;
    const std::string regime = regime_label(sp, policy_family, spec.phi);
    for (std::uint64_t n : spec.n_grid) {
        const double q = spec.q_at(n);
        const Policy pol = policy_family.with_q(q);
        const DetectorSpec det = detector.with_q(q);
        const PEEstimate est =
            estimate_pe(sp, pol, det, n, spec.trials_per_point, derive_seed(spec.base_seed, {n}), threads);
        double deficit;
        if (det.statistic == Statistic::IIA_RandomJob) {
            deficit = iia_deficit(sp, q, *det.batch, est.pi_j_used.value());
        } else if (det.geometric_a) {
            deficit = mean_sqrt_z_deficit(geometric_batch_params(sp, *det.geometric_a), q, det.statistic);
        } else {
            deficit = mean_sqrt_z_deficit(sp, q, det.statistic);
        }
        const DetectabilityReport rep = detectability_from_deficit(deficit, n);
        SweepRow row;
        row.n = n;
        row.q = q;
        row.t_n = static_cast<double>(n) * q;
        row.p_e = est.p_e;
        row.p_e_ci = est.ci_halfwidth;
        row.p_fa = est.p_fa;
        row.p_md = est.p_md;
        row.mean_sqrt_z = rep.mean_sqrt_z;
        row.hellinger_n = rep.hellinger_n;
        row.pe_lower = rep.pe_lower;
        row.regime = regime;
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool timestamp_header) {
    std::ostringstream os;
    if (timestamp_header) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        os << "# covertq sweep " << buf << "\n";
    }
    os << kSweepColumns << "\n";
    char line[512];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%llu,%.10g,%.10g,%.6g,%.6g,%.6g,%.6g,%.15g,%.10g,%.10g,%s\n",
                      static_cast<unsigned long long>(r.n), r.q, r.t_n, r.p_e, r.p_e_ci, r.p_fa, r.p_md,
                      r.mean_sqrt_z, r.hellinger_n, r.pe_lower, r.regime.c_str());
        os << line;
    }
    return os.str();
}

YVHistogram yv_histogram(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed,
                         int y_bins, int v_bins) {
    if (y_bins < 1 || v_bins < 1) throw DomainError("histogram needs at least one bin per axis");
    YVHistogram h;
    h.n = n_bps;
    for (int k = 0; k < y_bins; ++k) h.y_edges.push_back(k == 0 ? 0.0 : quantile(sp.g1, static_cast<double>(k) / y_bins));
    h.y_edges.push_back(kInf);
    for (int k = 0; k < v_bins; ++k)
        h.v_edges.push_back(k == 0 ? 0.0 : -std::log1p(-static_cast<double>(k) / v_bins) / sp.lambda);
    h.v_edges.push_back(kInf);

    // Density ratio f1 / f0 - 1 the policy induces on (y, v).
    std::function<double(double, double)> excess;
    switch (policy.kind) {
        case Policy::Kind::None: break;
        case Policy::Kind::IEBP: excess = [&](double y, double v) { return policy.q * rho(sp, y, v); }; break;
        case Policy::Kind::II: {
            auto ii = std::make_shared<IIQuantities>(sp, policy.q);
            excess = [ii](double y, double v) { return ii->density_ratio(y, v) - 1.0; };
            break;
        }
        default: throw UnsupportedCombination("(Y, V) density is available for no insertion, IEBP and II");
    }

    const std::size_t nb = static_cast<std::size_t>(y_bins) * v_bins;
    h.observed.assign(nb, 0.0);
    h.expected.assign(nb, 0.0);
    h.expected_h0.assign(nb, 0.0);
    const double N = static_cast<double>(n_bps);
    for (int i = 0; i < y_bins; ++i) {
        const double ya = h.y_edges[i], yb = h.y_edges[i + 1];
        const double py = (std::isinf(yb) ? 1.0 : sp.g1.cdf(yb)) - sp.g1.cdf(ya);
        for (int j = 0; j < v_bins; ++j) {
            const double va = h.v_edges[j], vb = h.v_edges[j + 1];
            const double pv = std::exp(-sp.lambda * va) - (std::isinf(vb) ? 0.0 : std::exp(-sp.lambda * vb));
            const double p0 = py * pv;
            double p1 = p0;
            if (excess) {
                p1 += integrate_range(
                    [&](double y) {
                        const double gy = sp.g1.pdf(y);
                        if (gy == 0.0) return 0.0;
                        return gy * integrate_range(
                                        [&](double v) { return sp.lambda * std::exp(-sp.lambda * v) * excess(y, v); },
                                        va, vb, 1.0 / sp.lambda);
                    },
                    ya, yb, sp.g1.mean());
            }
            h.expected_h0[i * v_bins + j] = N * p0;
            h.expected[i * v_bins + j] = N * p1;
        }
    }

    simulate(sp, policy, n_bps, seed, [&](const BusyPeriodObs& bp, const BusyPeriodTruth&) {
        const auto iy = std::upper_bound(h.y_edges.begin(), h.y_edges.end(), bp.y) - h.y_edges.begin() - 1;
        const auto iv = std::upper_bound(h.v_edges.begin(), h.v_edges.end(), bp.v) - h.v_edges.begin() - 1;
        h.observed[static_cast<std::size_t>(iy) * v_bins + static_cast<std::size_t>(iv)] += 1.0;
    });

    for (std::size_t b = 0; b < nb; ++b) {
        const double e = h.expected[b];
        const double d = h.observed[b] - e;
        h.chi2 += d * d / e;
        h.max_abs_z = std::max(h.max_abs_z, std::abs(d) / std::sqrt(e * (1.0 - e / N)));
    }
    h.dof = static_cast<int>(nb) - 1;
    h.p_value = chi_square_sf(h.chi2, h.dof);
    return h;
}

VerifyWhich verify_which_from_string(const std::string& name) {
    if (name == "t_w") return VerifyWhich::TW;
    if (name == "cycle_counts") return VerifyWhich::CycleCounts;
    if (name == "yv_density") return VerifyWhich::YVDensity;
    if (name == "expansion") return VerifyWhich::Expansion;
    if (name == "c0") return VerifyWhich::C0;
    throw InvalidConfig("unknown verification '" + name + "'");
}

std::string to_string(VerifyWhich w) {
    switch (w) {
        case VerifyWhich::TW: return "t_w";
        case VerifyWhich::CycleCounts: return "cycle_counts";
        case VerifyWhich::YVDensity: return "yv_density";
        case VerifyWhich::Expansion: return "expansion";
        case VerifyWhich::C0: return "c0";
    }
    return "unknown";
}

bool VerifyReport::pass() const {
    bool any = false;
    for (const auto& e : entries) {
        if (e.informational) continue;
        any = true;
        if (!e.pass) return false;
    }
    return any;
}

VerifyReport verify(const SystemParams& sp, const Policy& policy, VerifyWhich which, const VerifyOptions& opt) {
    VerifyReport rep;
    rep.which = to_string(which);
    switch (which) {
        case VerifyWhich::TW: {
            if (policy.kind != Policy::Kind::IEBP && policy.kind != Policy::Kind::None) {
                rep.notes.push_back("t_w applies to the IEBP policy (or no insertion); got " + policy.name());
                break;
            }
            const double q = policy.kind == Policy::Kind::None ? 0.0 : policy.q;
            std::uint64_t interfered = 0;
            const SimTotals tot = simulate(sp, policy, opt.n_bps, opt.seed,
                                           [&](const BusyPeriodObs&, const BusyPeriodTruth& t) {
                                               if (t.alice_ahead > 0) ++interfered;
                                           });
            const TwResult tw = t_w(sp, q, opt.n_bps);
            rep.entries.push_back(relative_entry("T_W(n) Willie jobs served", tw.value,
                                                 static_cast<double>(tot.willie_served), 0.02));
            const double n = static_cast<double>(opt.n_bps);
            const double pq = sp.p * q;
            VerifyEntry e;
            e.name = "interference frequency (discrepancy in standard errors)";
            e.analytic = pq;
            e.measured = interfered / n;
            const double se = std::sqrt(std::max(pq * (1.0 - pq), 1e-300) / n);
            e.discrepancy = std::abs(e.measured - e.analytic) / se;
            e.tolerance = 3.0;
            e.pass = e.discrepancy <= 3.0;
            rep.entries.push_back(e);
            VerifyEntry b;
            b.name = "T_W(n) two-sided bound (measured must lie in [analytic, tolerance])";
            b.analytic = tw.lower;
            b.tolerance = tw.upper;
            b.measured = static_cast<double>(tot.willie_served);
            b.pass = b.measured >= tw.lower && b.measured <= tw.upper;
            b.informational = true;
            rep.entries.push_back(b);
            break;
        }
        case VerifyWhich::CycleCounts: {
            if (policy.kind == Policy::Kind::II) {
                const SimTotals tot = simulate(sp, policy, opt.n_bps, opt.seed, [](const BusyPeriodObs&, const BusyPeriodTruth&) {});
                const IIQuantities ii(sp, policy.q);
                rep.entries.push_back(relative_entry("II insertions per W-BP", ii.t_plus(1),
                                                     static_cast<double>(tot.alice_inserted) / opt.n_bps, 0.02));
            } else if (policy.kind == Policy::Kind::IIA) {
                const CycleCounts cc = iia_cycle_counts(sp, policy.q, policy.batch);
                RunningMean nw, na, na_served;
                simulate(sp, policy, opt.n_bps, opt.seed, [&](const BusyPeriodObs& bp, const BusyPeriodTruth& t) {
                    nw.add(bp.n_jobs);
                    na.add(t.alice_inserted);
                    na_served.add(t.alice_served);
                });
                rep.entries.push_back(relative_entry("E[N_W] Willie jobs per cycle", cc.e_nw, nw.mean, 0.02));
                rep.entries.push_back(relative_entry("E[N_A] Alice jobs per cycle", cc.e_na, na.mean, 0.02));
                rep.entries.push_back(relative_entry("E[N_A] Alice completions per cycle", cc.e_na, na_served.mean, 0.02, true));
                rep.entries.push_back(relative_entry("E[N_W] reference closed form", cc.e_nw_reference, nw.mean, 0.02, true));
                rep.entries.push_back(relative_entry("E[N_A] reference closed form", cc.e_na_reference, na.mean, 0.02, true));
            } else {
                rep.notes.push_back("cycle_counts applies to the II and II-A policies; got " + policy.name());
            }
            break;
        }
        case VerifyWhich::YVDensity: {
            const YVHistogram h = yv_histogram(sp, policy, opt.n_bps, opt.seed, 6, 4);
            VerifyEntry chi;
            chi.name = "binned chi-square p-value (must exceed tolerance)";
            chi.analytic = 0.0;
            chi.measured = h.p_value;
            chi.discrepancy = h.chi2;
            chi.tolerance = 0.001;
            chi.pass = h.p_value > 0.001;
            rep.entries.push_back(chi);
            VerifyEntry z;
            z.name = "largest per-bin deviation in standard deviations";
            z.measured = h.max_abs_z;
            z.discrepancy = h.max_abs_z;
            z.tolerance = 3.0;
            z.pass = h.max_abs_z <= 3.0;
            rep.entries.push_back(z);
            break;
        }
        case VerifyWhich::Expansion: {
            const double th = opt.theta;
            const double coef = mean_sqrt_xi_dev(th, 0.5) / (th * th);
            rep.entries.push_back(relative_entry("r=0.5 theta^2 coefficient vs reference (1-r)/(4(r-2))",
                                                 reference_small_r_coefficient(0.5), coef, 0.05));
            rep.entries.push_back(relative_entry("r=0.5 theta^2 coefficient vs -r/(8(2-r))", small_r_coefficient(0.5),
                                                 coef, 0.05, true));
            const ExpansionTerms t2 = expansion(1e-16, 2.0);
            const double ratio2 = t2.mean_sqrt_xi_dev / (*t2.xi * *t2.xi * std::log(*t2.xi));
            rep.entries.push_back(relative_entry("r=2 (E sqrt Xi - 1)/(xi^2 log xi) at theta=1e-16", 0.25, ratio2, 0.05));
            const ExpansionTerms t3 = expansion(1e-5, 3.0);
            const double ratio3 = -t3.mean_sqrt_xi_dev / std::pow(*t3.xi, 1.5);
            rep.entries.push_back(relative_entry("r=3 (1 - E sqrt Xi)/xi^1.5 at theta=1e-5 vs I_1.5", *t3.i_beta, ratio3, 0.02));
            break;
        }
        case VerifyWhich::C0: {
            const C0Result r = c0(sp);
            bool reference_finite = true;
            bool reference_known = true;
            try {
                reference_finite = c0_finite(sp);
            } catch (const UnsupportedCombination&) {
                reference_known = false;
            }
            if (r.finite) {
                if (sp.exp_exp()) {
                    // C0 = lambda/(lambda+2 mu2) E[(K(X)-1)^2] with K(x) = mu2 (e^{(mu1-mu2)x}-1)/(mu1-mu2).
                    const double m1 = sp.mu1, m2 = sp.mu2, lam = sp.lambda;
                    double ek2;
                    if (sp.r == 1.0) {
                        ek2 = 1.0;
                    } else {
                        const double d = m1 - m2;
                        // E[(a e^{dX} - b)^2] with a = m2/d, b = m1/d, X ~ Exp(m1)
                        const double a = m2 / d, b = m1 / d;
                        const double e1 = m1 / (m1 - d), e2 = m1 / (m1 - 2.0 * d);
                        ek2 = a * a * e2 - 2.0 * a * b * e1 + b * b;
                    }
                    rep.entries.push_back(absolute_entry("C0 quadrature vs closed form", lam / (lam + 2.0 * m2) * ek2, r.value, 1e-4));
                } else {
                    VerifyEntry e;
                    e.name = "C0 quadrature value";
                    e.measured = r.value;
                    e.pass = std::isfinite(r.value);
                    e.informational = true;
                    rep.entries.push_back(e);
                }
            }
            VerifyEntry v;
            v.name = "finiteness verdict agrees with the closed-form condition (1 = finite)";
            v.analytic = reference_known ? (reference_finite ? 1.0 : 0.0) : std::numeric_limits<double>::quiet_NaN();
            v.measured = r.finite ? 1.0 : 0.0;
            v.pass = !reference_known || reference_finite == r.finite;
            rep.entries.push_back(v);
            if (!r.finite) {
                std::ostringstream os;
                os << "divergence verdict; truncated integrals:";
                for (std::size_t i = 0; i < r.growth.cutoffs.size(); ++i)
                    os << " [0," << r.growth.cutoffs[i] << "]=" << r.growth.partials[i];
                rep.notes.push_back(os.str());
            }
            break;
        }
    }
    return rep;
}

}  // namespace covertq
