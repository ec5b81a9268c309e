#pragma once

#include "confcycle/params.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace confcycle {

/// Tags separating the two shock streams of one simulation.
enum class StreamTag : std::uint64_t { Productivity = 1, Risk = 2 };

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of one stream: chained mix of (master, cell, replica, tag).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t replica,
                                    StreamTag tag) noexcept {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ cell);
    h = mix64(h ^ replica);
    return mix64(h ^ static_cast<std::uint64_t>(tag));
}

/// A single reproducible random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms use the top 53 bits; normals use the Marsaglia polar
/// method (only sqrt and log), caching the second variate of each pair. None
/// of the implementation-defined std distributions are used, so a given seed
/// produces the same draws on every conforming toolchain.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_zero() noexcept { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal.
    double normal() noexcept;

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// The two independent streams driving one trajectory.
struct ShockStreams {
    RandomStream productivity;
    RandomStream risk;

    /// Streams of replica `replica` of sweep cell `cell`. A standalone run uses
    /// cell 0, replica 0.
    static ShockStreams derive(std::uint64_t master_seed, std::uint64_t cell = 0, std::uint64_t replica = 0) {
        return ShockStreams{RandomStream(derive_seed(master_seed, cell, replica, StreamTag::Productivity)),
                            RandomStream(derive_seed(master_seed, cell, replica, StreamTag::Risk))};
    }
};

/// Log-deviation of productivity and the resulting level z = z0 * exp(frak_z).
struct ProductivityState {
    double frak_z = 0.0;
    double z = 0.0;
};

ProductivityState initial_productivity(const ModelParams& p);

/// AR(1) update with an explicit standard-normal innovation.
ProductivityState step_productivity(const ProductivityState& prev, const ModelParams& p, double std_normal);

/// AR(1) update drawing its innovation from `stream`.
ProductivityState step_productivity(const ProductivityState& prev, const ModelParams& p, RandomStream& stream);

/// Fraction of the promised return actually paid, with density a*xi^(a-1) on
/// [0, 1], from a uniform on (0, 1] by inverse CDF. a = +inf gives xi = 1.
double risk_from_uniform(double u, double a);

double draw_risk(const ModelParams& p, RandomStream& stream);

} // namespace confcycle
