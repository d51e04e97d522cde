#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fascai {

// Labels for independent random streams derived from one master seed.
enum class StreamTag : std::uint64_t {
    Task = 1,
    Solver = 2,
    Human = 3,
    Controller = 4,
    Session = 5,
    Rigged = 6,
};

// Seeded random stream. All sampling is implemented on top of the raw
// 64-bit engine output so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Stream keyed by (seed, tag, index). Streams for different keys are
    // statistically independent; the same key always yields the same stream.
    static Rng stream(std::uint64_t seed, StreamTag tag, std::uint64_t index);

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer on [0, n). n must be positive.
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }
    double normal();

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace fascai
