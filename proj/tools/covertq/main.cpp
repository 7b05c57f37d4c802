#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "covertq/analytics.hpp"
#include "covertq/detect.hpp"
#include "covertq/errors.hpp"
#include "covertq/experiments.hpp"
#include "covertq/io.hpp"
#include "covertq/rng.hpp"
#include "covertq/simqueue.hpp"

namespace {

using namespace covertq;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitStability = 3;
constexpr int kExitDivergence = 4;

struct Common {
    std::string config;
    unsigned threads = 0;
};

struct SimulateArgs {
    std::string policy = R"({"kind":"none"})";
    std::uint64_t n = 1000;
    std::uint64_t seed = 1;
    std::string out = "-";
};

struct DetectArgs {
    std::string spec;
    std::string trace;
    std::uint64_t seed = 1;
};

struct SweepArgs {
    std::string scaling = "{}";
    std::string out = "-";
    bool json = false;
};

struct AnalyticsArgs {
    std::string quantity;
    std::optional<double> q;
    std::optional<std::uint64_t> n;
    std::string statistic = "YV";
    std::optional<std::string> batch;
    std::optional<double> pi_j;
    double t = 0.0;
    double theta = 1e-3;
    double r = 0.5;
    double beta = 1.5;
};

struct VerifyArgs {
    std::string which;
    std::string policy = R"({"kind":"iebp","q":0.1})";
    std::uint64_t n = 100000;
    std::uint64_t seed = 1;
    double theta = 1e-3;
};

SystemParams load_config(const Common& c) { return io::parse_config(io::read_file(c.config)); }

std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
    if (path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*holder) throw InvalidConfig("cannot write '" + path + "'");
    return *holder;
}

int run_simulate(const Common& c, const SimulateArgs& a) {
    const SystemParams sp = load_config(c);
    const Policy policy = io::parse_policy(io::inline_or_file(a.policy));
    policy.validate(sp);
    std::unique_ptr<std::ofstream> holder;
    std::ostream& out = open_out(a.out, holder);
    std::uint64_t index = 0;
    const SimTotals totals = simulate(sp, policy, a.n, a.seed, [&](const BusyPeriodObs& bp, const BusyPeriodTruth&) {
        io::write_trace_record(out, index++, bp);
    });
    (a.out == "-" ? std::cerr : std::cout) << io::to_json(totals, a.n, a.seed) << "\n";
    return kExitOk;
}

int run_detect(const Common& c, const DetectArgs& a) {
    const SystemParams sp = load_config(c);
    DetectorSpec spec = io::parse_detector(io::inline_or_file(a.spec));
    std::ifstream in(a.trace);
    if (!in) throw InvalidConfig("cannot open trace '" + a.trace + "'");
    const std::vector<BusyPeriodObs> bps = io::read_trace(in);
    if (spec.statistic == Statistic::IIA_RandomJob && !spec.pi_j) {
        double inv = 0.0;
        for (const auto& bp : bps) inv += 1.0 / bp.n_jobs;
        spec.pi_j = bps.empty() ? 1.0 : inv / static_cast<double>(bps.size());
    }
    Rng rng(derive_seed(a.seed, {2}));
    std::vector<Observation> obs;
    obs.reserve(bps.size());
    for (const auto& bp : bps) obs.push_back(observe(spec.statistic, bp, rng));
    std::uint64_t clamped = 0;
    const double llr = loglr(spec, sp, obs, &clamped);
    const Hypothesis h = decide(llr);
    std::cout << "{\n  \"n\": " << obs.size() << ",\n  \"statistic\": \"" << to_string(spec.statistic)
              << "\",\n  \"loglr\": " << llr << ",\n  \"decision\": \"" << (h == Hypothesis::H1 ? "H1" : "H0")
              << "\",\n  \"clamped\": " << clamped;
    if (spec.pi_j) std::cout << ",\n  \"pi_j\": " << *spec.pi_j;
    std::cout << "\n}\n";
    return kExitOk;
}

int run_sweep(const Common& c, const SweepArgs& a) {
    const SystemParams sp = load_config(c);
    const io::SweepConfig cfg = io::parse_scaling(io::inline_or_file(a.scaling));
    const auto rows = sweep(sp, cfg.policy, cfg.scaling, cfg.detector, c.threads);
    std::unique_ptr<std::ofstream> holder;
    std::ostream& out = open_out(a.out, holder);
    out << (a.json ? io::to_json(rows) + "\n" : sweep_csv(rows));
    return kExitOk;
}

double need_q(const AnalyticsArgs& a) {
    if (!a.q) throw InvalidConfig("--q is required for '" + a.quantity + "'");
    return *a.q;
}

std::uint64_t need_n(const AnalyticsArgs& a) {
    if (!a.n) throw InvalidConfig("--n is required for '" + a.quantity + "'");
    return *a.n;
}

BatchPMF need_batch(const AnalyticsArgs& a) {
    if (!a.batch) throw InvalidConfig("--batch is required for '" + a.quantity + "'");
    return io::parse_policy(R"({"kind":"iia","batch":)" + *a.batch + "}").batch;
}

void print_scalar(const std::string& name, double value) {
    std::cout << "{\n  \"" << name << "\": " << value << "\n}\n";
}

int run_analytics(const Common& c, const AnalyticsArgs& a) {
    std::cout.precision(17);
    const std::string& k = a.quantity;
    if (k == "expansion") {
        std::cout << io::to_json(expansion(a.theta, a.r)) << "\n";
        return kExitOk;
    }
    if (k == "i_beta") {
        print_scalar("i_beta", i_beta(a.beta));
        return kExitOk;
    }
    const SystemParams sp = load_config(c);
    if (k == "params") {
        std::cout << io::to_json(sp) << "\n";
    } else if (k == "p") {
        print_scalar("p", sp.p);
    } else if (k == "g2_hat") {
        print_scalar("g2_hat", g2_hat(sp, a.t));
    } else if (k == "expected_rho") {
        print_scalar("expected_rho", expected_rho(sp));
    } else if (k == "c0") {
        const C0Result r = c0(sp);
        std::cout << io::to_json(r) << "\n";
        if (!r.finite) return kExitDivergence;
    } else if (k == "mean_sqrt_z") {
        const Statistic s = statistic_from_string(a.statistic);
        std::cout << "{\n  \"mean_sqrt_z\": " << mean_sqrt_z(sp, need_q(a), s)
                  << ",\n  \"deficit\": " << mean_sqrt_z_deficit(sp, need_q(a), s) << "\n}\n";
    } else if (k == "detectability") {
        std::cout << io::to_json(detectability(sp, need_q(a), need_n(a), statistic_from_string(a.statistic))) << "\n";
    } else if (k == "t_w") {
        std::cout << io::to_json(t_w(sp, need_q(a), need_n(a))) << "\n";
    } else if (k == "ii") {
        const IIQuantities ii(sp, need_q(a));
        std::cout << "{\n  \"t_plus\": " << ii.t_plus(a.n.value_or(1)) << ",\n  \"y_factor\": " << ii.y_factor()
                  << "\n}\n";
    } else if (k == "iia_q0") {
        print_scalar("q0", iia_q0(sp, need_batch(a)));
    } else if (k == "cycle_counts") {
        std::cout << io::to_json(iia_cycle_counts(sp, need_q(a), need_batch(a))) << "\n";
    } else if (k == "iia_c0" || k == "iia_f") {
        if (!a.pi_j) throw InvalidConfig("--pi-j is required for '" + k + "'");
        const BatchPMF Q = need_batch(a);
        if (k == "iia_c0") {
            print_scalar("c0", iia_c0(sp, Q, *a.pi_j));
        } else {
            std::cout << "{\n  \"f\": " << iia_f(sp, need_q(a), Q, *a.pi_j)
                      << ",\n  \"deficit\": " << iia_deficit(sp, need_q(a), Q, *a.pi_j) << "\n}\n";
        }
    } else {
        throw InvalidConfig("unknown quantity '" + k + "'");
    }
    return kExitOk;
}

int run_verify(const Common& c, const VerifyArgs& a) {
    const SystemParams sp = load_config(c);
    const Policy policy = io::parse_policy(io::inline_or_file(a.policy));
    policy.validate(sp);
    VerifyOptions opt;
    opt.n_bps = a.n;
    opt.seed = a.seed;
    opt.theta = a.theta;
    const VerifyReport rep = verify(sp, policy, verify_which_from_string(a.which), opt);
    std::cout << io::to_json(rep) << "\n";
    return rep.pass() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covertq: covert cycle stealing in an M/G/1 queue"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--threads", common.threads, "worker threads (0 = all cores)");

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON file with lambda, g1, g2")->required()->check(CLI::ExistingFile);
    };

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "simulate W-BPs and export a JSON-lines trace");
    add_config(s);
    s->add_option("--policy", sim.policy, "policy JSON (inline or file)");
    s->add_option("--n", sim.n, "number of W-BPs")->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed, "master seed");
    s->add_option("--out", sim.out, "trace output path ('-' for stdout)");

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "apply a detector to a JSON-lines trace");
    add_config(d);
    d->add_option("--spec", det.spec, "detector JSON (inline or file)")->required();
    d->add_option("--trace", det.trace, "JSON-lines trace")->required()->check(CLI::ExistingFile);
    d->add_option("--seed", det.seed, "seed for random-job selection");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "P_E versus n under a scaling law q(n) = delta / phi(n)");
    add_config(w);
    w->add_option("--scaling", sw.scaling, "scaling JSON (inline or file)");
    w->add_option("--out", sw.out, "CSV output path ('-' for stdout)");
    w->add_flag("--json", sw.json, "emit JSON rows instead of CSV");

    AnalyticsArgs an;
    auto* y = app.add_subcommand("analytics", "evaluate a closed-form quantity");
    y->add_option("quantity", an.quantity,
                  "params | p | g2_hat | expected_rho | c0 | mean_sqrt_z | detectability | t_w | ii | iia_q0 | "
                  "cycle_counts | iia_f | iia_c0 | expansion | i_beta")
        ->required();
    y->add_option("--config", common.config, "JSON file with lambda, g1, g2")->check(CLI::ExistingFile);
    y->add_option("--q", an.q, "insertion probability");
    y->add_option("--n", an.n, "number of W-BPs");
    y->add_option("--statistic", an.statistic, "YV | YOnly | II_YV | II_YOnly");
    y->add_option("--batch", an.batch, "II-A batch law as a JSON array, e.g. [0,1]");
    y->add_option("--pi-j", an.pi_j, "probability that the random job is first in its W-BP");
    y->add_option("--t", an.t, "argument of g2_hat");
    y->add_option("--theta", an.theta, "expansion parameter");
    y->add_option("--r", an.r, "rate ratio for the expansion");
    y->add_option("--beta", an.beta, "index of I_beta");

    VerifyArgs ver;
    auto* v = app.add_subcommand("verify", "compare analytic values against simulation or quadrature");
    v->add_option("which", ver.which, "t_w | cycle_counts | yv_density | expansion | c0")->required();
    add_config(v);
    v->add_option("--policy", ver.policy, "policy JSON (inline or file)");
    v->add_option("--n", ver.n, "number of W-BPs")->check(CLI::PositiveNumber);
    v->add_option("--seed", ver.seed, "master seed");
    v->add_option("--theta", ver.theta, "theta for the r = 0.5 expansion check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalidConfig;
    }

    try {
        if (*s) return run_simulate(common, sim);
        if (*d) return run_detect(common, det);
        if (*w) return run_sweep(common, sw);
        if (*y) {
            const bool needs_config = an.quantity != "expansion" && an.quantity != "i_beta";
            if (needs_config && common.config.empty()) throw InvalidConfig("--config is required for '" + an.quantity + "'");
            return run_analytics(common, an);
        }
        if (*v) return run_verify(common, ver);
    } catch (const StabilityError& e) {
        std::cerr << "covertq: stability violation: " << e.what() << "\n";
        return kExitStability;
    } catch (const DivergenceError& e) {
        std::cerr << "covertq: divergent quantity: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const InvalidConfig& e) {
        std::cerr << "covertq: invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "covertq: invalid input: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const DomainError& e) {
        std::cerr << "covertq: domain error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "covertq: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
