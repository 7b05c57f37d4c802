#include "covertq/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "covertq/errors.hpp"

namespace covertq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}

}  // namespace

ServiceDist::ServiceDist(Exponential e) : law_(e) { validate(); }
ServiceDist::ServiceDist(HyperExponential h) : law_(std::move(h)) { validate(); }
ServiceDist::ServiceDist(Erlang e) : law_(e) { validate(); }

ServiceDist ServiceDist::hyperexp(std::vector<std::pair<double, double>> weight_rate) {
    HyperExponential h;
    for (auto [w, r] : weight_rate) h.branches.push_back({w, r});
    return ServiceDist(std::move(h));
}

void ServiceDist::validate() const {
    std::visit(overloaded{
                   [](const Exponential& e) {
                       if (!(e.rate > 0.0) || !std::isfinite(e.rate))
                           throw InvalidConfig("exponential rate must be positive");
                   },
                   [](const HyperExponential& h) {
                       if (h.branches.empty()) throw InvalidConfig("hyper-exponential needs at least one branch");
                       double total = 0.0;
                       for (const auto& b : h.branches) {
                           if (!(b.rate > 0.0) || !std::isfinite(b.rate))
                               throw InvalidConfig("hyper-exponential rates must be positive");
                           if (!(b.weight >= 0.0)) throw InvalidConfig("hyper-exponential weights must be nonnegative");
                           total += b.weight;
                       }
                       if (std::abs(total - 1.0) > 1e-12)
                           throw InvalidConfig("hyper-exponential weights must sum to 1");
                   },
                   [](const Erlang& e) {
                       if (e.stages < 1) throw InvalidConfig("Erlang stages must be >= 1");
                       if (!(e.stage_rate > 0.0) || !std::isfinite(e.stage_rate))
                           throw InvalidConfig("Erlang stage rate must be positive");
                   },
               },
               law_);
}

double ServiceDist::pdf(double x) const {
    require_nonnegative(x, "pdf argument");
    return std::visit(overloaded{
                          [x](const Exponential& e) { return e.rate * std::exp(-e.rate * x); },
                          [x](const HyperExponential& h) {
                              double s = 0.0;
                              for (const auto& b : h.branches) s += b.weight * b.rate * std::exp(-b.rate * x);
                              return s;
                          },
                          [this, x](const Erlang& e) {
                              if (x == 0.0) return e.stages == 1 ? e.stage_rate : 0.0;
                              return std::exp(log_pdf(x));
                          },
                      },
                      law_);
}

double ServiceDist::log_pdf(double x) const {
    require_nonnegative(x, "log_pdf argument");
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    return std::visit(overloaded{
                          [x](const Exponential& e) { return std::log(e.rate) - e.rate * x; },
                          [x](const HyperExponential& h) {
                              // log-sum-exp over the branches
                              double top = neg_inf;
                              for (const auto& b : h.branches)
                                  if (b.weight > 0.0) top = std::max(top, std::log(b.weight * b.rate) - b.rate * x);
                              double s = 0.0;
                              for (const auto& b : h.branches)
                                  if (b.weight > 0.0) s += std::exp(std::log(b.weight * b.rate) - b.rate * x - top);
                              return top + std::log(s);
                          },
                          [x](const Erlang& e) {
                              const double k = e.stages;
                              if (x == 0.0) return e.stages == 1 ? std::log(e.stage_rate) : neg_inf;
                              return k * std::log(e.stage_rate) + (k - 1.0) * std::log(x) - e.stage_rate * x -
                                     std::lgamma(k);
                          },
                      },
                      law_);
}

double ServiceDist::cdf(double x) const {
    require_nonnegative(x, "cdf argument");
    return std::visit(overloaded{
                          [x](const Exponential& e) { return -std::expm1(-e.rate * x); },
                          [x](const HyperExponential& h) {
                              double s = 0.0;
                              for (const auto& b : h.branches) s += b.weight * -std::expm1(-b.rate * x);
                              return s;
                          },
                          [x](const Erlang& e) {
                              if (x == 0.0) return 0.0;
                              return boost::math::gamma_p(static_cast<double>(e.stages), e.stage_rate * x);
                          },
                      },
                      law_);
}

double ServiceDist::sf(double x) const {
    require_nonnegative(x, "sf argument");
    return std::visit(overloaded{
                          [x](const Exponential& e) { return std::exp(-e.rate * x); },
                          [x](const HyperExponential& h) {
                              double s = 0.0;
                              for (const auto& b : h.branches) s += b.weight * std::exp(-b.rate * x);
                              return s;
                          },
                          [x](const Erlang& e) {
                              if (x == 0.0) return 1.0;
                              return boost::math::gamma_q(static_cast<double>(e.stages), e.stage_rate * x);
                          },
                      },
                      law_);
}

double ServiceDist::lst(double s) const {
    require_nonnegative(s, "LST argument");
    return std::visit(overloaded{
                          [s](const Exponential& e) { return e.rate / (e.rate + s); },
                          [s](const HyperExponential& h) {
                              double v = 0.0;
                              for (const auto& b : h.branches) v += b.weight * b.rate / (b.rate + s);
                              return v;
                          },
                          [s](const Erlang& e) { return std::pow(e.stage_rate / (e.stage_rate + s), e.stages); },
                      },
                      law_);
}

double ServiceDist::mean() const {
    return std::visit(overloaded{
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const HyperExponential& h) {
                              double m = 0.0;
                              for (const auto& b : h.branches) m += b.weight / b.rate;
                              return m;
                          },
                          [](const Erlang& e) { return e.stages / e.stage_rate; },
                      },
                      law_);
}

double ServiceDist::sample(Rng& rng) const {
    return std::visit(overloaded{
                          [&rng](const Exponential& e) { return rng.exponential(e.rate); },
                          [&rng](const HyperExponential& h) {
                              double u = rng.uniform();
                              double acc = 0.0;
                              for (const auto& b : h.branches) {
                                  acc += b.weight;
                                  if (u < acc) return rng.exponential(b.rate);
                              }
                              return rng.exponential(h.branches.back().rate);
                          },
                          [&rng](const Erlang& e) {
                              double t = 0.0;
                              for (int i = 0; i < e.stages; ++i) t += rng.exponential(e.stage_rate);
                              return t;
                          },
                      },
                      law_);
}

double ServiceDist::min_rate() const {
    return std::visit(overloaded{
                          [](const Exponential& e) { return e.rate; },
                          [](const HyperExponential& h) {
                              double m = std::numeric_limits<double>::infinity();
                              for (const auto& b : h.branches) m = std::min(m, b.rate);
                              return m;
                          },
                          [](const Erlang& e) { return e.stage_rate; },
                      },
                      law_);
}

double ServiceDist::max_rate() const {
    return std::visit(overloaded{
                          [](const Exponential& e) { return e.rate; },
                          [](const HyperExponential& h) {
                              double m = 0.0;
                              for (const auto& b : h.branches) m = std::max(m, b.rate);
                              return m;
                          },
                          [](const Erlang& e) { return e.stage_rate; },
                      },
                      law_);
}

std::vector<HyperExponential::Branch> ServiceDist::exp_mixture() const {
    if (const auto* e = std::get_if<Exponential>(&law_)) return {{1.0, e->rate}};
    if (const auto* h = std::get_if<HyperExponential>(&law_)) return h->branches;
    return {};
}

std::string ServiceDist::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&os](const Exponential& e) { os << "exp(rate=" << e.rate << ")"; },
                   [&os](const HyperExponential& h) {
                       os << "hyperexp(";
                       for (std::size_t i = 0; i < h.branches.size(); ++i) {
                           if (i) os << ", ";
                           os << h.branches[i].weight << "@" << h.branches[i].rate;
                       }
                       os << ")";
                   },
                   [&os](const Erlang& e) { os << "erlang(stages=" << e.stages << ", rate=" << e.stage_rate << ")"; },
               },
               law_);
    return os.str();
}

}  // namespace covertq
