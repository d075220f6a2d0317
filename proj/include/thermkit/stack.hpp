#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thermkit/material.hpp"

namespace thermkit {

/// Millimetres to metres. Every geometry constructor that takes mm goes
/// through here exactly once.
constexpr double mm(double value_mm) noexcept { return value_mm * 1e-3; }
constexpr double to_mm(double value_m) noexcept { return value_m * 1e3; }

enum class ArrayKind { Tsv, Microbump, C4 };

/// Square-pitch array of vertical cylinders (core + optional liner) embedded
/// in a matrix. The array is centered in its layer's footprint.
struct InterconnectArray {
    ArrayKind kind = ArrayKind::Tsv;
    double pitch = 0.0;  // m
    int count_x = 0;
    int count_y = 0;
    double r_core = 0.0;   // m
    double t_shell = 0.0;  // m, 0 for bumps
    Material core;
    Material shell;
    Material matrix;

    double r_outer() const noexcept { return r_core + t_shell; }
    double span_x() const noexcept { return pitch * count_x; }
    double span_y() const noexcept { return pitch * count_y; }
};

/// Axis-aligned rectangle in layer-local coordinates (metres, origin at the
/// layer footprint's lower-left corner).
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
    double area() const noexcept { return width() * height(); }
};

struct CoreRegion {
    std::string id;
    Rect rect;
};

struct Layer {
    std::string name;
    double thickness = 0.0;  // m
    double extent_x = 0.0;   // m
    double extent_y = 0.0;   // m
    Material bulk;
    std::optional<InterconnectArray> array;
    std::vector<CoreRegion> power_regions;

    bool is_active() const noexcept { return !power_regions.empty(); }
};

struct BoundaryCondition {
    enum class Kind { Adiabatic, Convective, Dirichlet };

    Kind kind = Kind::Adiabatic;
    double h = 0.0;      // W/(m^2 K), convective only
    double t_ref = 0.0;  // K: t_inf for convective, fixed value for Dirichlet

    static BoundaryCondition adiabatic() { return {}; }
    static BoundaryCondition convective(double h, double t_inf) {
        return {Kind::Convective, h, t_inf};
    }
    static BoundaryCondition dirichlet(double t) { return {Kind::Dirichlet, 0.0, t}; }
};

/// Layers are ordered bottom (index 0) to top. All layer footprints are
/// centered on the widest one; lateral faces are adiabatic. `bc_top` acts on
/// the top face of the last layer and `bc_bottom` on the bottom face of the
/// first; exposed steps between layers of different footprint are adiabatic.
struct PackageStack {
    std::string name;
    double ambient = 293.15;  // K
    BoundaryCondition bc_top;
    BoundaryCondition bc_bottom;
    std::vector<Layer> layers;

    double footprint_x() const noexcept;
    double footprint_y() const noexcept;
    /// Global-frame offset of layer `i`'s lower-left corner.
    double layer_origin_x(std::size_t i) const;
    double layer_origin_y(std::size_t i) const;
    double layer_z0(std::size_t i) const;
    double height() const noexcept;
    double volume() const noexcept;

    std::optional<std::size_t> find_layer(const std::string& name) const;
    /// Core ids in stack order (bottom layer first, regions in declaration order).
    std::vector<std::string> core_ids() const;
};

struct Violation {
    std::string layer;  // empty for stack-level rules
    std::string rule;
    std::string detail;
};

/// Checks every structural invariant; returns one entry per broken rule.
std::vector<Violation> validate_stack(const PackageStack& stack);

/// Per-core power in watts, plus the seed it was drawn from (0 when hand-made).
struct PowerAssignment {
    std::map<std::string, double> watts;
    std::uint64_t seed = 0;
};

inline bool operator==(const PowerAssignment& a, const PowerAssignment& b) {
    return a.watts == b.watts && a.seed == b.seed;
}

/// Sum of per-core powers. Throws LookupError if the assignment names a core
/// the stack does not have, or misses one it does.
double stack_total_power(const PackageStack& stack, const PowerAssignment& assignment);

}  // namespace thermkit
