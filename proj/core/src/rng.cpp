#include "covertq/rng.hpp"

#include <cmath>

namespace covertq {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t idx : path) {
        h = splitmix64(h ^ splitmix64(idx + 0x632be59bd9b4e019ULL));
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() {
    // 53 random bits, shifted off zero so that log(u) is always finite.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

bool Rng::bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
}

std::uint64_t Rng::below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

Rng Rng::split(std::uint64_t index) const { return Rng(derive_seed(seed_, {index})); }

}  // namespace covertq
