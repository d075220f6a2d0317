#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "thermkit/material.hpp"
#include "thermkit/stack.hpp"

namespace testing {

// Generators for property tests. Seeded per test so failures reproduce.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline thermkit::Material mat(const std::string& name, double k, double cv = 1.6e6) {
    return thermkit::Material{name, k, 1000.0, cv / 1000.0};
}

// A single-layer slab: width x width x thickness, one heated region covering it.
inline thermkit::PackageStack slab(double k, double thickness, double width, thermkit::BoundaryCondition bottom,
                                   thermkit::BoundaryCondition top, double cv = 1.6e6) {
    thermkit::PackageStack s;
    s.name = "slab";
    s.bc_bottom = bottom;
    s.bc_top = top;
    thermkit::Layer l;
    l.name = "slab";
    l.thickness = thickness;
    l.extent_x = l.extent_y = width;
    l.bulk = mat("m", k, cv);
    l.power_regions = {{"heat", {0.0, 0.0, width, width}}};
    s.layers = {l};
    return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("thermkit_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace testing
