#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "thermkit/bench.hpp"
#include "thermkit/error.hpp"

using namespace thermkit;
using namespace testing;

TEST_CASE("splitmix64 reference outputs") {
    // First outputs for seed 1234567, as published with the algorithm.
    SplitMix64 r(1234567);
    CHECK(r.next() == 6457827717110365317ull);
    CHECK(r.next() == 3203168211198807973ull);
    CHECK(r.next() == 9817491932198370423ull);
    SplitMix64 u(0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("sample_power statistics") {
    const PackageStack s = make_case("ind8c");
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 0; seed < 10000 / 8 + 1; ++seed) {
        const PowerAssignment p = sample_power(s, seed);
        CHECK(p.seed == seed);
        REQUIRE(p.watts.size() == 8);
        for (const auto& [id, w] : p.watts) {
            CHECK(w >= 0.0);
            CHECK(w <= kMaxCorePower);
            sum += w;
            sum2 += w * w;
            ++n;
        }
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.02) <= 0.0015);
    // Uniform on [0, 0.04]: variance 0.04^2 / 12.
    CHECK(sum2 / n - mean * mean == doctest::Approx(0.04 * 0.04 / 12).epsilon(0.05));
}

TEST_CASE("sampling is deterministic and seed-sensitive") {
    const PackageStack s = make_case("ind32c");
    CHECK(sample_power(s, 42) == sample_power(s, 42));
    CHECK_FALSE(sample_power(s, 42) == sample_power(s, 43));
}

TEST_CASE("waveforms") {
    const PackageStack s = make_case("ind8c");
    const PowerWaveform one = sample_waveform(s, 9, 1, 2.0);
    REQUIRE(one.segments.size() == 1);
    CHECK(one.segments[0].power.watts == sample_power(s, 9).watts);

    const PowerWaveform w = sample_waveform(s, 9, 4, 2.0);
    REQUIRE(w.segments.size() == 4);
    CHECK(w.segments[2].t_start == doctest::Approx(1.0));
    CHECK(w.segment_at(-1.0) == 0);
    CHECK(w.segment_at(0.49) == 0);
    CHECK(w.segment_at(0.5) == 1);
    CHECK(w.segment_at(5.0) == 3);
    CHECK(w.segments[0].power.watts == one.segments[0].power.watts);
    CHECK_FALSE(w.segments[1].power.watts == w.segments[0].power.watts);
    CHECK_THROWS_AS(sample_waveform(s, 9, 0, 1.0), Error);
}
