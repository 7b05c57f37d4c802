#pragma once

#include <stdexcept>
#include <string>

namespace covertq {

// Argument outside the mathematical domain of an operation (negative time, q > 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Configuration that cannot be turned into a valid model.
class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Parameters that make the queue unstable (rho1 >= 1, or II-A load >= 1).
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A distribution pair or statistic that an operation does not cover.
class UnsupportedCombination : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Quadrature failed to converge or a quantity is infinite where a scalar was requested.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

// Arrival/departure sequences that violate ordering assumptions.
class MalformedTrace : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Simulated backlog exceeded the runaway guard.
class RunawayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace covertq
