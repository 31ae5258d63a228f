#pragma once

#include <cstdint>
#include <random>

namespace disorder {

/// Seedable, splittable random source.
///
/// Streams are derived as mt19937_64 seeded by std::seed_seq over the 32-bit
/// halves of (seed, stream_id). Both the engine and seed_seq are fully
/// specified by the standard, so a (seed, stream_id) pair produces the same
/// sequence on every conforming platform. Uniform variates are built from the
/// top 53 bits of the engine output rather than std::uniform_real_distribution,
/// whose algorithm is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    Rng(std::uint64_t seed, std::uint64_t stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    /// Independent substream `stream_id` of the generator family `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) { return Rng(seed, stream_id); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_closed() { return 1.0 - uniform(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace disorder
