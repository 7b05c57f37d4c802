#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace covertq {

// Mixes a 64-bit value with the SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Derives a child seed from a master seed and an index path. Different paths
// give statistically independent streams; the mapping is pure, so parallel
// trials reproduce regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Uniform on the open interval (0, 1).
    double uniform();
    double exponential(double rate);
    bool bernoulli(double p);
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Independent child stream keyed by index.
    Rng split(std::uint64_t index) const;
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace covertq
