#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermkit/stack.hpp"

namespace thermkit {

/// SplitMix64 (Steele, Lea & Flood 2014). Chosen over the <random> engines
/// because it is five lines in any language, which keeps seeds reproducible
/// across the C++ and Python halves of the toolkit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Upper bound of the per-core power range, W.
inline constexpr double kMaxCorePower = 0.04;

/// Names accepted by make_case.
const std::vector<std::string>& case_names();

/// Canonical benchmark stacks: "ind8c", "ind32c", "hs-like-1c", "hs-like-4c",
/// "hs-like-8c". Throws LookupError for anything else.
PackageStack make_case(const std::string& name);

/// Independent uniform draw on [0, kMaxCorePower] for every core in stack
/// order.
PowerAssignment sample_power(const PackageStack& stack, std::uint64_t seed);

/// Piecewise-constant power schedule. Segment i is active on
/// [t_start_i, t_start_{i+1}).
struct PowerWaveform {
    struct Segment {
        double t_start = 0.0;
        PowerAssignment power;
    };
    std::vector<Segment> segments;

    /// Index of the segment active at time t (t < 0 maps to segment 0).
    std::size_t segment_at(double t) const;
    const PowerAssignment& at(double t) const { return segments.at(segment_at(t)).power; }

    static PowerWaveform constant(PowerAssignment p) { return PowerWaveform{{{0.0, std::move(p)}}}; }
};

/// n_segments equal-length segments over [0, t_end], each with a fresh draw
/// from one generator stream; with one segment this equals sample_power.
PowerWaveform sample_waveform(const PackageStack& stack, std::uint64_t seed, int n_segments, double t_end);

}  // namespace thermkit
