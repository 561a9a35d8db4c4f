#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qnas {

// splitmix64 finalizer; used to mix seed components into well-spread streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stateless stream derivation: every consumer of randomness gets its own
// stream keyed by (master seed, purpose, generation, slot, extra). Results are
// independent of scheduling and nothing has to be persisted for resume.
enum class Stream : std::uint64_t {
    InitParams = 1,
    Mutation = 2,
    Shuffle = 3,
    Split = 4,
    Probe = 5,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ static_cast<std::uint64_t>(purpose));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// mt19937_64 has a standard-pinned output sequence, but the std::
// distributions do not, so the distributions here are hand-rolled.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n); n >= 1
    int uniform_int(int n) {
        return static_cast<int>(uniform() * static_cast<double>(n));
    }

    bool coin() { return (engine_() & 1ULL) != 0; }

    // Box-Muller, exactly two engine draws per call.
    double gaussian(double mean, double sigma) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace qnas
