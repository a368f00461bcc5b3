#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace agmcts {

std::uint64_t splitmix64(std::uint64_t x);

// Seed for episode `index` of a sweep started at `seed_base`.
std::uint64_t episode_seed(std::uint64_t seed_base, std::uint64_t index);

// Per-caller random source. Normal draws use the polar method on top of the
// raw engine so that streams do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    std::size_t index(std::size_t n);

    // Independent child stream, e.g. for per-episode sources.
    Rng split();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace agmcts
