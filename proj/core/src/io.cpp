#include "covertq/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "covertq/errors.hpp"
#include "json.hpp"

namespace covertq::io {

using nlohmann::json;

namespace {

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string(what) + ": " + e.what());
    }
}

template <class T>
T get(const json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key)) throw InvalidConfig(std::string(what) + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string(what) + ": bad value for '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const char* what) {
    if (!j.contains(key)) return fallback;
    return get<T>(j, key, what);
}

// NaN and infinities have no JSON spelling; emit null instead.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

ServiceDist dist_from(const json& j) {
    const auto kind = get<std::string>(j, "kind", "service distribution");
    try {
        if (kind == "exp") return ServiceDist::exponential(get<double>(j, "rate", "exp"));
        if (kind == "erlang") return ServiceDist::erlang(get<int>(j, "stages", "erlang"), get<double>(j, "rate", "erlang"));
        if (kind == "hyperexp") {
            const auto br = get<std::vector<std::vector<double>>>(j, "branches", "hyperexp");
            std::vector<std::pair<double, double>> wr;
            for (const auto& b : br) {
                if (b.size() != 2) throw InvalidConfig("hyperexp: each branch is [weight, rate]");
                wr.emplace_back(b[0], b[1]);
            }
            return ServiceDist::hyperexp(std::move(wr));
        }
    } catch (const DomainError& e) {
        throw InvalidConfig(std::string("service distribution: ") + e.what());
    }
    throw InvalidConfig("unknown service distribution kind '" + kind + "'");
}

json dist_to(const ServiceDist& d) {
    return std::visit(
        [](const auto& law) -> json {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return {{"kind", "exp"}, {"rate", law.rate}};
            } else if constexpr (std::is_same_v<T, Erlang>) {
                return {{"kind", "erlang"}, {"stages", law.stages}, {"rate", law.stage_rate}};
            } else {
                json br = json::array();
                for (const auto& b : law.branches) br.push_back({b.weight, b.rate});
                return {{"kind", "hyperexp"}, {"branches", br}};
            }
        },
        d.law());
}

BatchPMF batch_from(const json& j, const char* what) {
    try {
        return BatchPMF(j.get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string(what) + ": batch must be an array of probabilities: " + e.what());
    } catch (const DomainError& e) {
        throw InvalidConfig(std::string(what) + ": " + e.what());
    }
}

Policy policy_from(const json& j) {
    const auto kind = policy_kind_from_string(get<std::string>(j, "kind", "policy"));
    const double q = get_or<double>(j, "q", 0.0, "policy");
    switch (kind) {
        case Policy::Kind::None: return Policy::none();
        case Policy::Kind::IEBP: return Policy::iebp(q);
        case Policy::Kind::II: return Policy::ii(q);
        case Policy::Kind::IIA: return Policy::iia(q, batch_from(j.at("batch"), "policy"));
        case Policy::Kind::IIAGeometric: return Policy::iia_geometric(q, get<double>(j, "a", "policy"));
    }
    return Policy::none();
}

DetectorSpec detector_from(const json& j) {
    DetectorSpec d;
    d.statistic = statistic_from_string(get<std::string>(j, "statistic", "detector"));
    d.assumed_q = get_or<double>(j, "q", 0.0, "detector");
    if (j.contains("batch")) d.batch = batch_from(j.at("batch"), "detector");
    if (j.contains("pi_j")) d.pi_j = get<double>(j, "pi_j", "detector");
    if (j.contains("geometric_a")) d.geometric_a = get<double>(j, "geometric_a", "detector");
    return d;
}

Phi phi_from(const json& j) {
    Phi phi;
    const std::string kind = j.is_string() ? j.get<std::string>() : get<std::string>(j, "kind", "phi");
    if (kind == "sqrt") {
        phi.kind = Phi::Kind::Sqrt;
    } else if (kind == "sqrt_nlogn") {
        phi.kind = Phi::Kind::SqrtNLogN;
    } else if (kind == "power") {
        phi.kind = Phi::Kind::Power;
        phi.gamma = get<double>(j, "gamma", "phi");
    } else if (kind == "const") {
        phi.kind = Phi::Kind::Const;
        phi.c = get<double>(j, "c", "phi");
    } else {
        throw InvalidConfig("unknown phi kind '" + kind + "'");
    }
    return phi;
}

}  // namespace

ServiceDist parse_dist(const std::string& text) { return dist_from(parse_text(text, "service distribution")); }

SystemParams parse_config(const std::string& text) {
    const json j = parse_text(text, "config");
    const double lambda = get<double>(j, "lambda", "config");
    if (!j.contains("g1") || !j.contains("g2")) throw InvalidConfig("config: keys 'g1' and 'g2' are required");
    return SystemParams::make(lambda, dist_from(j.at("g1")), dist_from(j.at("g2")));
}

Policy parse_policy(const std::string& text) { return policy_from(parse_text(text, "policy")); }

DetectorSpec parse_detector(const std::string& text) { return detector_from(parse_text(text, "detector")); }

DetectorSpec matched_detector(const Policy& policy) {
    DetectorSpec d;
    d.assumed_q = policy.q;
    switch (policy.kind) {
        case Policy::Kind::None:
        case Policy::Kind::IEBP: d.statistic = Statistic::YV; break;
        case Policy::Kind::II: d.statistic = Statistic::II_YV; break;
        case Policy::Kind::IIA:
            d.statistic = Statistic::IIA_RandomJob;
            d.batch = policy.batch;
            break;
        case Policy::Kind::IIAGeometric:
            d.statistic = Statistic::YV;
            d.geometric_a = policy.a;
            break;
    }
    return d;
}

SweepConfig parse_scaling(const std::string& text) {
    const json j = parse_text(text, "scaling");
    SweepConfig cfg;
    if (!j.is_object()) throw InvalidConfig("scaling: expected a JSON object");
    if (j.contains("phi")) cfg.scaling.phi = phi_from(j.at("phi"));
    cfg.scaling.delta = get_or<double>(j, "delta", cfg.scaling.delta, "scaling");
    cfg.scaling.n_grid = get_or<std::vector<std::uint64_t>>(j, "n_grid", cfg.scaling.n_grid, "scaling");
    cfg.scaling.trials_per_point = get_or<std::uint64_t>(j, "trials_per_point", cfg.scaling.trials_per_point, "scaling");
    cfg.scaling.base_seed = get_or<std::uint64_t>(j, "base_seed", cfg.scaling.base_seed, "scaling");
    cfg.policy = j.contains("policy") ? policy_from(j.at("policy")) : Policy::iebp(0.0);
    cfg.detector = j.contains("detector") ? detector_from(j.at("detector")) : matched_detector(cfg.policy);
    cfg.scaling.validate();
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string inline_or_file(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{') return arg;
    return read_file(arg);
}

void write_trace_record(std::ostream& out, std::uint64_t bp_index, const BusyPeriodObs& bp) {
    const json j = {{"bp", bp_index},         {"n_jobs", bp.n_jobs},     {"v", bp.v},
                    {"y", bp.y},              {"services", bp.services}, {"arrivals", bp.arrivals}};
    out << j.dump() << '\n';
}

std::vector<BusyPeriodObs> read_trace(std::istream& in) {
    std::vector<BusyPeriodObs> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "trace line " + std::to_string(lineno) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedTrace(where + e.what());
        }
        BusyPeriodObs bp;
        try {
            bp.n_jobs = j.at("n_jobs").get<std::uint32_t>();
            bp.v = j.at("v").get<double>();
            bp.services = j.at("services").get<std::vector<double>>();
            bp.arrivals = j.value("arrivals", std::vector<double>{});
            bp.y = j.contains("y") ? j.at("y").get<double>() : (bp.services.empty() ? 0.0 : bp.services.front());
        } catch (const json::exception& e) {
            throw MalformedTrace(where + e.what());
        }
        if (bp.n_jobs == 0 || bp.services.size() != bp.n_jobs)
            throw MalformedTrace(where + "n_jobs must be positive and match the number of services");
        if (!bp.arrivals.empty() && bp.arrivals.size() != bp.n_jobs)
            throw MalformedTrace(where + "arrivals must match n_jobs");
        if (!(bp.v >= 0.0)) throw MalformedTrace(where + "v must be nonnegative");
        for (double s : bp.services)
            if (!(s >= 0.0)) throw MalformedTrace(where + "services must be nonnegative");
        out.push_back(std::move(bp));
    }
    return out;
}

std::string to_json(const SystemParams& sp) {
    const json j = {{"lambda", sp.lambda}, {"g1", dist_to(sp.g1)}, {"g2", dist_to(sp.g2)}, {"mu1", sp.mu1},
                    {"mu2", sp.mu2},       {"r", sp.r},            {"beta", num(sp.beta)}, {"p", sp.p},
                    {"rho1", sp.rho1},     {"rho2", sp.rho2}};
    return j.dump(2);
}

std::string to_json(const SimTotals& t, std::uint64_t n_bps, std::uint64_t seed) {
    const json j = {{"n_bps", n_bps},
                    {"seed", seed},
                    {"willie_served", t.willie_served},
                    {"alice_inserted", t.alice_inserted},
                    {"alice_served", t.alice_served},
                    {"simulated_time", t.wall_time_simulated},
                    {"mean_jobs_per_bp", static_cast<double>(t.willie_served) / static_cast<double>(n_bps)}};
    return j.dump(2);
}

std::string to_json(const PEEstimate& e) {
    json j = {{"p_fa", e.p_fa},     {"p_md", e.p_md},       {"p_e", e.p_e}, {"trials", e.trials},
              {"ci_halfwidth", e.ci_halfwidth}, {"clamped", e.clamped}};
    if (e.pi_j_used) j["pi_j_used"] = *e.pi_j_used;
    return j.dump(2);
}

std::string to_json(const DetectabilityReport& r) {
    const json j = {{"mean_sqrt_z", r.mean_sqrt_z}, {"hellinger_n", r.hellinger_n}, {"tv_lower", r.tv_lower},
                    {"tv_upper", r.tv_upper},       {"pe_lower", r.pe_lower}};
    return j.dump(2);
}

std::string to_json(const TwResult& t) {
    const json j = {{"value", t.value}, {"lower", t.lower}, {"upper", t.upper},
                    {"mean_interference_work", t.mean_interference_work}};
    return j.dump(2);
}

std::string to_json(const ExpansionTerms& t) {
    json j = {{"theta", t.theta}, {"r", t.r}, {"mean_sqrt_xi_exact", t.mean_sqrt_xi_exact},
              {"mean_sqrt_xi_dev", t.mean_sqrt_xi_dev}};
    j["xi"] = t.xi ? json(*t.xi) : json(nullptr);
    j["i_beta"] = t.i_beta ? json(*t.i_beta) : json(nullptr);
    j["f_r"] = t.f_r ? json(*t.f_r) : json(nullptr);
    return j.dump(2);
}

std::string to_json(const C0Result& c) {
    json j = {{"finite", c.finite}};
    j["value"] = c.finite ? num(c.value) : json(nullptr);
    if (!c.growth.cutoffs.empty()) {
        json g = json::array();
        for (std::size_t i = 0; i < c.growth.cutoffs.size(); ++i)
            g.push_back({{"cutoff", c.growth.cutoffs[i]}, {"partial", num(c.growth.partials[i])}});
        j["growth"] = g;
    }
    return j.dump(2);
}

std::string to_json(const CycleCounts& c) {
    const json j = {{"e_nw", c.e_nw},
                    {"e_na", c.e_na},
                    {"q0", c.q0},
                    {"e_na_idle", c.e_na_idle},
                    {"interference_work", c.interference_work},
                    {"e_nw_reference", c.e_nw_reference},
                    {"e_na_reference", c.e_na_reference}};
    return j.dump(2);
}

std::string to_json(const VerifyReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"name", e.name},
                           {"analytic", num(e.analytic)},
                           {"measured", num(e.measured)},
                           {"discrepancy", num(e.discrepancy)},
                           {"tolerance", num(e.tolerance)},
                           {"pass", e.pass},
                           {"informational", e.informational}});
    }
    const json j = {{"which", r.which}, {"pass", r.pass()}, {"entries", entries}, {"notes", r.notes}};
    return j.dump(2);
}

std::string to_json(const std::vector<SweepRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        a.push_back({{"n", r.n},
                     {"q", r.q},
                     {"t_n", r.t_n},
                     {"p_e", r.p_e},
                     {"p_e_ci", r.p_e_ci},
                     {"p_fa", r.p_fa},
                     {"p_md", r.p_md},
                     {"mean_sqrt_z", r.mean_sqrt_z},
                     {"hellinger_n", r.hellinger_n},
                     {"pe_lower", r.pe_lower},
                     {"regime", r.regime}});
    }
    return a.dump(2);
}

}  // namespace covertq::io
