#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "covertq/analytics.hpp"
#include "covertq/detect.hpp"
#include "covertq/experiments.hpp"
#include "covertq/params.hpp"
#include "covertq/simqueue.hpp"

namespace covertq::io {

// Text in, domain object out. Malformed JSON, missing keys and bad values throw InvalidConfig;
// model constraints (rho1 >= 1) keep their own exception types.

// {"kind":"exp","rate":1}, {"kind":"hyperexp","branches":[[w,rate],...]}, {"kind":"erlang","stages":k,"rate":r}
ServiceDist parse_dist(const std::string& json_text);
// {"lambda": ..., "g1": <dist>, "g2": <dist>}
SystemParams parse_config(const std::string& json_text);
// {"kind":"iebp","q":0.1}, {"kind":"iia","q":0.2,"batch":[0,1]}, {"kind":"iia_geometric","q":0.1,"a":0.5}
Policy parse_policy(const std::string& json_text);
// {"statistic":"yv","q":0.1,"batch":[...],"pi_j":0.4,"geometric_a":0.5}
DetectorSpec parse_detector(const std::string& json_text);

struct SweepConfig {
    ScalingSpec scaling;
    Policy policy;
    DetectorSpec detector;
};
// {"phi":"sqrt" | {"kind":"power","gamma":0.25} | ..., "delta":0.1, "n_grid":[...],
//  "trials_per_point":400, "base_seed":1, "policy":{...}, "detector":{...}}
// The policy defaults to IEBP and the detector to the statistic matched to the policy.
SweepConfig parse_scaling(const std::string& json_text);

// Detector matched to a policy family: YV for IEBP, II_YV for II, the random-job
// statistic with the policy's batch law for II-A.
DetectorSpec matched_detector(const Policy& policy);

// Reads a whole file; throws InvalidConfig if it cannot be opened.
std::string read_file(const std::string& path);
// Returns the argument itself when it starts with '{', otherwise the contents of the named file.
std::string inline_or_file(const std::string& arg);

// One JSON object per line: {bp, n_jobs, v, y, services, arrivals}.
void write_trace_record(std::ostream& out, std::uint64_t bp_index, const BusyPeriodObs& bp);
// Throws MalformedTrace with the offending line number.
std::vector<BusyPeriodObs> read_trace(std::istream& in);

std::string to_json(const SystemParams& sp);
std::string to_json(const SimTotals& totals, std::uint64_t n_bps, std::uint64_t seed);
std::string to_json(const PEEstimate& est);
std::string to_json(const DetectabilityReport& rep);
std::string to_json(const TwResult& tw);
std::string to_json(const ExpansionTerms& terms);
std::string to_json(const C0Result& c0);
std::string to_json(const CycleCounts& cc);
std::string to_json(const VerifyReport& rep);
std::string to_json(const std::vector<SweepRow>& rows);

}  // namespace covertq::io
