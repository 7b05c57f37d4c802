#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "covertq/rng.hpp"

namespace covertq {

struct Exponential {
    double rate;
};

struct HyperExponential {
    struct Branch {
        double weight;
        double rate;
    };
    std::vector<Branch> branches;
};

struct Erlang {
    int stages;
    double stage_rate;
};

// Service-time law: exponential, hyper-exponential mixture, or Erlang.
// Construction validates the parameters; all evaluation members are pure.
class ServiceDist {
public:
    using Variant = std::variant<Exponential, HyperExponential, Erlang>;

    ServiceDist(Exponential e);
    ServiceDist(HyperExponential h);
    ServiceDist(Erlang e);

    static ServiceDist exponential(double rate) { return ServiceDist(Exponential{rate}); }
    static ServiceDist hyperexp(std::vector<std::pair<double, double>> weight_rate);
    static ServiceDist erlang(int stages, double stage_rate) { return ServiceDist(Erlang{stages, stage_rate}); }

    double pdf(double x) const;
    // Natural log of the density; -infinity where the density vanishes.
    double log_pdf(double x) const;
    double cdf(double x) const;
    // Survival function 1 - cdf, evaluated without cancellation.
    double sf(double x) const;
    // Laplace-Stieltjes transform E[exp(-s X)].
    double lst(double s) const;
    double mean() const;
    double sample(Rng& rng) const;

    // Smallest and largest exponential rate appearing in the law (stage rate for Erlang).
    double min_rate() const;
    double max_rate() const;

    bool is_exponential() const { return std::holds_alternative<Exponential>(law_); }
    bool is_hyperexp() const { return std::holds_alternative<HyperExponential>(law_); }
    bool is_erlang() const { return std::holds_alternative<Erlang>(law_); }

    // Exponential and hyper-exponential laws as a list of (weight, rate) pairs;
    // empty for Erlang.
    std::vector<HyperExponential::Branch> exp_mixture() const;

    const Variant& law() const { return law_; }
    std::string describe() const;

private:
    void validate() const;
    Variant law_;
};

}  // namespace covertq
