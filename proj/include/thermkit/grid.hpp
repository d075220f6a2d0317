#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thermkit/bench.hpp"
#include "thermkit/stack.hpp"

namespace thermkit {

enum class Fidelity { High, Low };

std::string to_string(Fidelity f);
Fidelity fidelity_from_string(const std::string& s);

/// One layer's block of cells: uniform in-plane spacing over the layer
/// footprint, uniform dz within the layer. Slabs never straddle a layer
/// interface; neighbouring slabs may use different in-plane spacing.
struct Slab {
    std::size_t layer = 0;
    double x0 = 0.0, y0 = 0.0, z0 = 0.0;  // global lower corner, m
    int nx = 0, ny = 0, nz = 0;
    double dx = 0.0, dy = 0.0, dz = 0.0;
    std::size_t offset = 0;  // index of cell (0,0,0)

    std::size_t cells() const noexcept { return static_cast<std::size_t>(nx) * ny * nz; }
    std::size_t index(int i, int j, int k) const noexcept {
        return offset + (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    double cell_volume() const noexcept { return dx * dy * dz; }
};

/// Structured multi-slab voxel mesh with per-cell anisotropic conductivity,
/// volumetric heat capacity and source density.
struct VoxelGrid {
    Fidelity fidelity = Fidelity::Low;
    std::string stack_name;
    std::vector<Slab> slabs;  // one per layer, bottom-up
    std::vector<double> kx, ky, kz;  // W/(m K)
    std::vector<double> cv;          // J/(m^3 K)
    std::vector<double> q;           // W/m^3

    std::size_t size() const noexcept { return kx.size(); }
    /// Slab holding cell `cell`.
    const Slab& slab_of(std::size_t cell) const;
    std::vector<double> cell_volumes() const;
    double total_volume() const;
};

/// In-plane resolution is `cells_per_mm` clamped to `max_cells_per_axis` per
/// layer; each cell's properties are averaged over subsamples^2 in-plane
/// points. A layer gets max(z_cells_per_layer, ceil(thickness * z_cells_per_mm))
/// cells in z.
struct HfResolution {
    double cells_per_mm = 100.0;
    int z_cells_per_layer = 4;
    double z_cells_per_mm = 8.0;
    int max_cells_per_axis = 200;
    int subsamples = 3;
};

/// `z_cells_per_layer == 0` picks ceil(thickness / 0.1 mm) clamped to [1, 4].
struct LfResolution {
    double cells_per_mm = 10.0;
    int z_cells_per_layer = 0;
    int max_cells_per_axis = 20;
    int subsamples = 3;
};

/// Resolves interconnect cylinders explicitly. Throws GeometryError when
/// fewer than two cells span the core radius of any array.
VoxelGrid build_hf_mesh(const PackageStack& stack, const HfResolution& res = {});

/// Array-bearing layers carry their homogenized equivalent properties.
VoxelGrid build_lf_mesh(const PackageStack& stack, const LfResolution& res = {});

/// Replaces grid.q with the assignment spread uniformly over each core
/// region (partial cells weighted by overlap volume).
void rasterize_power(VoxelGrid& grid, const PackageStack& stack, const PowerAssignment& assignment);

/// Source density fields for each waveform segment, same index space as
/// the grid.
struct SourceSchedule {
    std::vector<double> t_start;
    std::vector<std::vector<double>> q;

    std::size_t segment_at(double t) const;
};

SourceSchedule rasterize_waveform(const VoxelGrid& grid, const PackageStack& stack, const PowerWaveform& waveform);

/// Volume-weighted restriction of `field` on `src` onto the cells of `dst`.
/// Both grids must come from the same stack.
std::vector<double> resample_to(const VoxelGrid& src, std::span<const double> field, const VoxelGrid& dst);

/// Area-weighted average of the top cell level of `layer` onto an h x w grid
/// covering the layer footprint (row-major, row = y).
std::vector<double> top_plane(const VoxelGrid& grid, std::span<const double> field, std::size_t layer, int h,
                              int w);

/// One-dimensional overlaps between two uniform partitions.
struct Overlap {
    int src = 0;
    int dst = 0;
    double length = 0.0;
};

std::vector<Overlap> overlaps_1d(double a0, double da, int na, double b0, double db, int nb);

}  // namespace thermkit
