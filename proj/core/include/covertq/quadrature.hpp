#pragma once

#include <functional>
#include <type_traits>
#include <utility>
#include <vector>

namespace covertq {

// Non-owning reference to a callable double(double); cheap to pass into nested integrals.
class FunctionRef {
public:
    template <class F, class = std::enable_if_t<!std::is_same_v<std::decay_t<F>, FunctionRef>>>
    FunctionRef(F&& f)  // NOLINT(google-explicit-constructor)
        : obj_(const_cast<void*>(static_cast<const void*>(&f))),
          call_([](void* o, double x) { return (*static_cast<std::remove_reference_t<F>*>(o))(x); }) {}

    double operator()(double x) const { return call_(obj_, x); }

private:
    void* obj_;
    double (*call_)(void*, double);
};

struct QuadOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    int max_intervals = 2000;
    // Length scale of the map t -> a + scale * t / (1 - t) used on [a, inf).
    double scale = 1.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Globally adaptive 21-point Gauss-Kronrod quadrature on [a, b].
QuadResult integrate(FunctionRef f, double a, double b, const QuadOptions& opt = {});

// Integral over [a, inf) through the rational map x = a + scale * t / (1 - t),
// which carries both exponentially and algebraically decaying tails onto a finite
// interval with an integrable endpoint.
QuadResult integrate_to_inf(FunctionRef f, double a, const QuadOptions& opt = {});

// Convenience wrappers that throw NumericError when the tolerance is not met.
double quad(FunctionRef f, double a, double b, const QuadOptions& opt = {});
double quad_inf(FunctionRef f, double a, const QuadOptions& opt = {});

// Truncated-integral growth curve used to decide whether an improper integral
// of a nonnegative integrand is finite.
struct GrowthCurve {
    std::vector<double> cutoffs;
    std::vector<double> partials;
    bool diverges = false;
};

// Integrates f over [a, c] for c in {10, 100, 1000} / min_rate and declares
// divergence when the increments do not shrink on a log scale.
GrowthCurve truncated_growth(FunctionRef f, double a, double min_rate, const QuadOptions& opt = {});

}  // namespace covertq
