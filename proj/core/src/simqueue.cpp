#include "covertq/simqueue.hpp"

#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "covertq/analytics.hpp"
#include "covertq/errors.hpp"
#include "covertq/rng.hpp"

namespace covertq {

Policy Policy::iebp(double q) {
    Policy p;
    p.kind = Kind::IEBP;
    p.q = q;
    return p;
}

Policy Policy::ii(double q) {
    Policy p;
    p.kind = Kind::II;
    p.q = q;
    return p;
}

Policy Policy::iia(double q, BatchPMF batch) {
    Policy p;
    p.kind = Kind::IIA;
    p.q = q;
    p.batch = std::move(batch);
    return p;
}

Policy Policy::iia_geometric(double q, double a) {
    Policy p;
    p.kind = Kind::IIAGeometric;
    p.q = q;
    p.a = a;
    return p;
}

Policy Policy::with_q(double new_q) const {
    Policy p = *this;
    p.q = new_q;
    return p;
}

void Policy::validate(const SystemParams& sp) const {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("policy q must lie in [0, 1]");
    if (kind == Kind::IIA) {
        const double load = sp.rho1 + q * sp.rho2 * batch.mean();
        if (!(load < 1.0)) {
            std::ostringstream os;
            os << "II-A unstable: rho1 + q rho2 B = " << load << " >= 1";
            throw StabilityError(os.str());
        }
    }
    if (kind == Kind::IIAGeometric) {
        if (!(a > 0.0 && a <= 1.0)) throw DomainError("geometric continuation parameter a must lie in (0, 1]");
        const double load = sp.rho1 + q * sp.rho2 / a;
        if (!(load < 1.0)) {
            std::ostringstream os;
            os << "geometric II-A unstable: rho1 + q rho2 / a = " << load << " >= 1";
            throw StabilityError(os.str());
        }
    }
}

std::string to_string(Policy::Kind k) {
    switch (k) {
        case Policy::Kind::None: return "none";
        case Policy::Kind::IEBP: return "iebp";
        case Policy::Kind::II: return "ii";
        case Policy::Kind::IIA: return "iia";
        case Policy::Kind::IIAGeometric: return "iia_geometric";
    }
    return "unknown";
}

Policy::Kind policy_kind_from_string(const std::string& name) {
    if (name == "none") return Policy::Kind::None;
    if (name == "iebp") return Policy::Kind::IEBP;
    if (name == "ii") return Policy::Kind::II;
    if (name == "iia") return Policy::Kind::IIA;
    if (name == "iia_geometric") return Policy::Kind::IIAGeometric;
    throw InvalidConfig("unknown policy kind '" + name + "'");
}

std::string Policy::name() const {
    std::ostringstream os;
    os << to_string(kind);
    if (kind != Kind::None) os << "(q=" << q;
    if (kind == Kind::IIA) os << ", B=" << batch.mean();
    if (kind == Kind::IIAGeometric) os << ", a=" << a;
    if (kind != Kind::None) os << ")";
    return os.str();
}

namespace {

enum class EventKind : int { Departure = 0, Arrival = 1, Insertion = 2 };

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    std::uint32_t count;  // Alice jobs carried by an insertion
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        return a.seq > b.seq;
    }
};

struct Job {
    bool willie;
    double arrival;
};

class Engine {
public:
    Engine(const SystemParams& sp, const Policy& policy, std::uint64_t seed, const SimOptions& opt)
        : sp_(sp),
          policy_(policy),
          opt_(opt),
          arrivals_rng_(derive_seed(seed, {1})),
          willie_rng_(derive_seed(seed, {2})),
          alice_rng_(derive_seed(seed, {3})),
          alice_service_rng_(derive_seed(seed, {4})) {}

    SimTotals run(std::uint64_t n_bps, const BusyPeriodVisitor& visit) {
        schedule(arrivals_rng_.exponential(sp_.lambda), EventKind::Arrival, 0);
        // Time zero counts as the end of a (virtual) W-BP, so every W-BP sees the same law.
        on_bp_end(0.0);
        on_idle(0.0);
        while (completed_ < n_bps) {
            const Event ev = events_.top();
            events_.pop();
            now_ = ev.time;
            switch (ev.kind) {
                case EventKind::Departure: handle_departure(visit); break;
                case EventKind::Arrival: handle_arrival(); break;
                case EventKind::Insertion: handle_insertion(ev.count); break;
            }
        }
        totals_.wall_time_simulated = now_;
        return totals_;
    }

private:
    void schedule(double time, EventKind kind, std::uint32_t count) { events_.push({time, kind, seq_++, count}); }

    void start_service() {
        const Job& j = queue_.front();
        const double s = j.willie ? sp_.g1.sample(willie_rng_) : sp_.g2.sample(alice_service_rng_);
        busy_ = true;
        schedule(now_ + s, EventKind::Departure, 0);
    }

    void enqueue(const Job& j) {
        queue_.push_back(j);
        if (queue_.size() > opt_.runaway_guard) {
            std::ostringstream os;
            os << "runaway backlog: more than " << opt_.runaway_guard << " jobs in system at t=" << now_;
            throw RunawayError(os.str());
        }
        if (!busy_) start_service();
    }

    std::uint32_t draw_batch() {
        if (policy_.kind == Policy::Kind::IIAGeometric) {
            std::uint32_t s = 1;
            while (!alice_rng_.bernoulli(policy_.a)) ++s;
            return s;
        }
        const double u = alice_rng_.uniform();
        double acc = 0.0;
        const auto& probs = policy_.batch.probs();
        for (std::size_t s = 0; s < probs.size(); ++s) {
            acc += probs[s];
            if (u < acc) return static_cast<std::uint32_t>(s);
        }
        return static_cast<std::uint32_t>(probs.size() - 1);
    }

    bool idle_inserter() const {
        return policy_.kind == Policy::Kind::II || policy_.kind == Policy::Kind::IIA ||
               policy_.kind == Policy::Kind::IIAGeometric;
    }

    void on_bp_end(double t) {
        if (policy_.kind == Policy::Kind::IEBP) {
            if (alice_rng_.bernoulli(policy_.q)) schedule(t, EventKind::Insertion, 1);
        } else if (idle_inserter()) {
            idle_loop_ = true;
        }
    }

    void on_idle(double t) {
        if (!idle_loop_) return;
        if (alice_rng_.bernoulli(policy_.q)) {
            const std::uint32_t k = policy_.kind == Policy::Kind::IIAGeometric ? draw_batch() : 1;
            schedule(t, EventKind::Insertion, k);
        } else {
            idle_loop_ = false;
        }
    }

    void handle_departure(const BusyPeriodVisitor& visit) {
        const Job job = queue_.front();
        queue_.pop_front();
        busy_ = false;
        if (job.willie) {
            bp_.services.push_back(now_ - std::max(job.arrival, last_willie_departure_));
            last_willie_departure_ = now_;
            ++totals_.willie_served;
            --willie_in_system_;
        } else {
            ++totals_.alice_served;
            ++truth_.alice_served;
        }
        if (!queue_.empty()) start_service();
        if (job.willie && willie_in_system_ == 0) {
            bp_.n_jobs = static_cast<std::uint32_t>(bp_.services.size());
            bp_.y = bp_.services.front();
            visit(bp_, truth_);
            ++completed_;
            bp_.arrivals.clear();
            bp_.services.clear();
            truth_ = {};
            last_bp_end_ = now_;
            on_bp_end(now_);
        }
        if (queue_.empty()) on_idle(now_);
    }

    void handle_arrival() {
        schedule(now_ + arrivals_rng_.exponential(sp_.lambda), EventKind::Arrival, 0);
        if (willie_in_system_ == 0) {
            bp_.v = now_ - last_bp_end_;
            truth_.alice_ahead = static_cast<std::uint32_t>(queue_.size());
            idle_loop_ = false;
        }
        ++willie_in_system_;
        bp_.arrivals.push_back(now_);
        enqueue({true, now_});
        if ((policy_.kind == Policy::Kind::IIA || policy_.kind == Policy::Kind::IIAGeometric) &&
            alice_rng_.bernoulli(policy_.q)) {
            const std::uint32_t k = draw_batch();
            if (k > 0) schedule(now_, EventKind::Insertion, k);
        }
    }

    void handle_insertion(std::uint32_t count) {
        for (std::uint32_t i = 0; i < count; ++i) {
            ++totals_.alice_inserted;
            ++truth_.alice_inserted;
            enqueue({false, now_});
        }
    }

    const SystemParams& sp_;
    const Policy& policy_;
    SimOptions opt_;
    Rng arrivals_rng_;
    Rng willie_rng_;
    Rng alice_rng_;
    Rng alice_service_rng_;

    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::deque<Job> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
    bool busy_ = false;
    bool idle_loop_ = false;
    std::uint64_t willie_in_system_ = 0;
    double last_willie_departure_ = 0.0;
    double last_bp_end_ = 0.0;
    std::uint64_t completed_ = 0;
    BusyPeriodObs bp_;
    BusyPeriodTruth truth_;
    SimTotals totals_;
};

}  // namespace

SimTotals simulate(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed,
                   const BusyPeriodVisitor& visit, const SimOptions& opt) {
    if (n_bps < 1) throw DomainError("n_bps must be >= 1");
    policy.validate(sp);
    Engine engine(sp, policy, seed, opt);
    return engine.run(n_bps, visit);
}

SimRun run(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed,
           const SimOptions& opt) {
    SimRun out;
    out.seed = seed;
    out.bps.reserve(n_bps);
    out.truth.reserve(n_bps);
    const SimTotals t = simulate(
        sp, policy, n_bps, seed,
        [&out](const BusyPeriodObs& bp, const BusyPeriodTruth& tr) {
            out.bps.push_back(bp);
            out.truth.push_back(tr);
        },
        opt);
    out.alice_inserted = t.alice_inserted;
    out.alice_served = t.alice_served;
    out.willie_served = t.willie_served;
    out.wall_time_simulated = t.wall_time_simulated;
    return out;
}

std::vector<double> reconstruct_services(const std::vector<double>& arrivals, const std::vector<double>& departures) {
    if (arrivals.size() != departures.size()) throw MalformedTrace("arrival and departure sequences differ in length");
    std::vector<double> s;
    s.reserve(arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        if (i > 0 && !(arrivals[i] > arrivals[i - 1])) throw MalformedTrace("arrivals must be strictly increasing");
        if (i > 0 && !(departures[i] > departures[i - 1])) throw MalformedTrace("departures must be strictly increasing");
        if (!(departures[i] > arrivals[i])) throw MalformedTrace("each departure must follow its arrival");
        const double start = i == 0 ? arrivals[i] : std::max(arrivals[i], departures[i - 1]);
        s.push_back(departures[i] - start);
    }
    return s;
}

std::vector<std::pair<double, double>> extract_yv(const SimRun& run) {
    std::vector<std::pair<double, double>> out;
    out.reserve(run.bps.size());
    for (const auto& bp : run.bps) out.emplace_back(bp.y, bp.v);
    return out;
}

RandomJobSelection pick_random_job(const SimRun& run, std::uint64_t seed) {
    RandomJobSelection sel;
    Rng rng(seed);
    std::size_t first = 0;
    sel.picks.reserve(run.bps.size());
    for (std::size_t j = 0; j < run.bps.size(); ++j) {
        const auto& bp = run.bps[j];
        const std::size_t idx = static_cast<std::size_t>(rng.below(bp.n_jobs));
        sel.picks.push_back({j, idx, bp.services[idx]});
        if (idx == 0) ++first;
    }
    sel.pi_hat = sel.picks.empty() ? 0.0 : static_cast<double>(first) / static_cast<double>(sel.picks.size());
    return sel;
}

double calibrate_pi_j(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed) {
    double acc = 0.0;
    simulate(sp, policy, n_bps, seed,
             [&acc](const BusyPeriodObs& bp, const BusyPeriodTruth&) { acc += 1.0 / bp.n_jobs; });
    return acc / static_cast<double>(n_bps);
}

}  // namespace covertq
