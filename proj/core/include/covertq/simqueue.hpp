#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "covertq/params.hpp"

namespace covertq {

// Alice's insertion strategy.
struct Policy {
    enum class Kind { None, IEBP, II, IIA, IIAGeometric };

    Kind kind = Kind::None;
    double q = 0.0;
    BatchPMF batch;   // II-A batch law
    double a = 1.0;   // geometric II-A: P(batch size = s) = a (1-a)^(s-1), mean 1/a

    static Policy none() { return {}; }
    static Policy iebp(double q);
    static Policy ii(double q);
    static Policy iia(double q, BatchPMF batch);
    static Policy iia_geometric(double q, double a);

    Policy with_q(double new_q) const;
    // Throws DomainError for q outside [0,1] and StabilityError when II-A overloads the server.
    void validate(const SystemParams& sp) const;
    std::string name() const;
};

std::string to_string(Policy::Kind k);
Policy::Kind policy_kind_from_string(const std::string& name);

// Willie-observable record of one W-BP.
struct BusyPeriodObs {
    std::uint32_t n_jobs = 0;
    std::vector<double> arrivals;  // absolute arrival times of the W-BP's jobs
    std::vector<double> services;  // reconstructed service times
    double y = 0.0;                // services[0]
    double v = 0.0;                // length of the preceding Willie idle period
};

// Ground truth kept next to the observables; detectors never see it.
struct BusyPeriodTruth {
    std::uint32_t alice_inserted = 0;  // insertions during this cycle (idle period + W-BP)
    std::uint32_t alice_served = 0;    // Alice completions during this cycle
    std::uint32_t alice_ahead = 0;     // Alice jobs present when the first Willie job arrived
};

struct SimRun {
    std::uint64_t seed = 0;
    std::vector<BusyPeriodObs> bps;
    std::vector<BusyPeriodTruth> truth;
    std::uint64_t alice_inserted = 0;
    std::uint64_t alice_served = 0;
    std::uint64_t willie_served = 0;
    double wall_time_simulated = 0.0;
};

struct SimTotals {
    std::uint64_t alice_inserted = 0;
    std::uint64_t alice_served = 0;
    std::uint64_t willie_served = 0;
    double wall_time_simulated = 0.0;
};

struct SimOptions {
    std::size_t runaway_guard = 1'000'000;
};

using BusyPeriodVisitor = std::function<void(const BusyPeriodObs&, const BusyPeriodTruth&)>;

// Simulates exactly n_bps complete W-BPs from an empty system and hands each one
// to the visitor as it completes. The visitor's references are reused between calls.
SimTotals simulate(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed,
                   const BusyPeriodVisitor& visit, const SimOptions& opt = {});

// Same simulation, materialised.
SimRun run(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed,
           const SimOptions& opt = {});

// S_1 = D_1 - A_1, S_i = D_i - max(A_i, D_{i-1}).
std::vector<double> reconstruct_services(const std::vector<double>& arrivals, const std::vector<double>& departures);

std::vector<std::pair<double, double>> extract_yv(const SimRun& run);

struct RandomJobPick {
    std::size_t bp_index = 0;
    std::size_t job_index = 0;
    double service = 0.0;
};

struct RandomJobSelection {
    std::vector<RandomJobPick> picks;
    double pi_hat = 0.0;  // fraction of picks with job_index == 0
};

RandomJobSelection pick_random_job(const SimRun& run, std::uint64_t seed);

// Estimates pi_J = P(the uniformly chosen job is the first of its W-BP) = E[1/N]
// by simulating the given configuration.
double calibrate_pi_j(const SystemParams& sp, const Policy& policy, std::uint64_t n_bps, std::uint64_t seed);

}  // namespace covertq
