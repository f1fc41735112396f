#ifndef MVJUMP_RNG_HPP
#define MVJUMP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>

namespace mvj {

/// Identifier recorded in output metadata so runs can be replayed bit-exactly.
inline const char* kGeneratorId = "splitmix64-counter";

namespace detail {

// 64-bit finalizer (Stafford mix13 / murmur3-style avalanche).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace detail

/// Counter-based splittable generator: the output sequence is a pure
/// function of (key words..., counter). Streams keyed on disjoint word
/// tuples are independent, and a stream never changes when more streams
/// are added, so enlarging N preserves streams 1..N-1.
class CounterRng {
public:
    CounterRng() : base_(0) {}

    explicit CounterRng(std::initializer_list<std::uint64_t> key_words) {
        std::uint64_t h = 0x6a09e667f3bcc909ULL;
        for (std::uint64_t w : key_words)
            h = detail::mix64(h ^ detail::mix64(w + detail::kGolden));
        base_ = h;
    }

    std::uint64_t next_u64() {
        return detail::mix64(base_ + detail::kGolden * ++counter_);
    }

    /// Uniform on [0,1), 53-bit resolution, never exactly 1.
    double u01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0,1], safe as log() argument.
    double u01_open0() { return 1.0 - u01(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    double exponential(double rate) { return -std::log(u01_open0()) / rate; }

    /// Box-Muller; consumes two uniforms, no carried state.
    double gaussian() {
        const double r = std::sqrt(-2.0 * std::log(u01_open0()));
        const double theta = 2.0 * M_PI * u01();
        return r * std::cos(theta);
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

/// Fixed substream tags so independent consumers of one (seed, stream)
/// pair never collide.
enum class Substream : std::uint64_t {
    InitialState = 1,
    Brownian = 2,
    PoissonEvents = 3,
    OwnerMark = 4,
    TargetMark = 5,
    Compensator = 6,
    Probe = 7,
    Experiment = 8,
};

inline CounterRng make_rng(std::uint64_t seed, std::uint64_t stream, Substream sub,
                           std::uint64_t extra = 0) {
    return CounterRng{seed, stream, static_cast<std::uint64_t>(sub), extra};
}

} // namespace mvj

#endif
