#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "thermkit/grid.hpp"
#include "thermkit/stack.hpp"

namespace thermkit::validate {

/// A heated TSV slab between two bulk-silicon slabs, cooled through the
/// bottom face and adiabatic elsewhere. Array geometry, materials and slab
/// thickness come from the heated TSV layer of a reference case. Only one
/// pitch cell is meshed: the array fills the layer, the sides are adiabatic
/// and the heating is uniform, so every cell of the full layer sees the same
/// field.
struct TsvStructure {
    std::string reference_case = "ind8c";
    /// 0 keeps the reference f_TSV; otherwise radii are rescaled at fixed
    /// pitch and fixed r_core / r_outer.
    double fraction = 0.0;
    double neighbor_thickness = 0.2e-3;  // m, each side
    BoundaryCondition sink = BoundaryCondition::dirichlet(293.15);
    /// Power over the full reference layer footprint, W.
    double power = 0.2;
    /// Replace core and liner by the matrix material (homogenization becomes exact).
    bool uniform_materials = false;
};

/// Reference TSV layer of a case: the lowest active layer with a TSV array.
const Layer& reference_tsv_layer(const PackageStack& stack);

struct UnitCell {
    PackageStack stack;     // one pitch cell; its single core id is "heater"
    double power = 0.0;     // W into the cell
    double f_tsv = 0.0;     // inclusion fraction
    int cells_in_layer = 0; // pitch cells in the full reference layer
};

/// Throws GeometryError when the fraction cannot be realized with
/// non-overlapping cylinders.
UnitCell build_tsv_structure(const TsvStructure& s);

struct Resolution {
    int cells_per_pitch = 60;
    int z_cells_per_layer = 20;
};

/// Both meshes use the same z cells, so the comparison isolates the in-plane
/// homogenization. The LF grid has one cell per pitch.
VoxelGrid structure_hf_mesh(const UnitCell& u, const Resolution& r);
VoxelGrid structure_lf_mesh(const UnitCell& u, const Resolution& r);

/// max over LF cells of |T_LF - R(T_HF)| / (max R(T_HF) - t_inf), with R the
/// volume-weighted restriction of the HF field onto the LF cells.
double rise_normalized_error(const VoxelGrid& hf, const std::vector<double>& t_hf, const VoxelGrid& lf,
                             const std::vector<double>& t_lf, double t_inf);

struct StepConfig {
    TsvStructure structure{.sink = BoundaryCondition::convective(1000.0, 293.15)};
    double t_end = 1.5;
    double dt = 0.01;
    /// Coarser than the sweep default: every step costs about one steady solve.
    Resolution resolution{24, 10};
};

struct StepResult {
    std::vector<double> times;
    std::vector<double> probe_hf;   // hottest HF voxel at t_end
    std::vector<double> probe_lf;   // LF cell containing that voxel
    std::vector<double> error;      // rise-normalized field error per time (0 at t = 0)
    double max_rel_error = 0.0;
    double f_tsv = 0.0;
    double t_inf = 0.0;
    std::size_t hf_cells = 0;
    std::size_t lf_cells = 0;
    double hf_wall_s = 0.0;
    double lf_wall_s = 0.0;
};

StepResult transient_step_check(const StepConfig& cfg);

struct SweepConfig {
    std::vector<double> fractions{0.025, 0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.50};
    TsvStructure structure;
    Resolution resolution;
    int jobs = 1;
};

struct SweepPoint {
    double fraction = 0.0;
    bool skipped = false;
    std::string note;
    double error = 0.0;  // rise-normalized max
    double r_core = 0.0, r_outer = 0.0, pitch = 0.0;
    std::size_t hf_cells = 0;
    double rise_k = 0.0;
};

/// Points come back ordered by fraction.
std::vector<SweepPoint> fraction_sweep(const SweepConfig& cfg);

struct CostConfig {
    std::string case_name = "ind8c";
    std::uint64_t seed = 1;
    HfResolution hf;
    LfResolution lf;
    int lf_repeats = 5;
};

struct CostResult {
    std::string case_name;
    std::size_t hf_cells = 0, lf_cells = 0;
    double element_ratio = 0.0;
    double hf_wall_s = 0.0, lf_wall_s = 0.0;  // mesh + assembly + solve
    double hf_solve_s = 0.0, lf_solve_s = 0.0;
    double speedup = 0.0;
    std::size_t hf_iterations = 0, lf_iterations = 0;
    double total_power = 0.0;
    std::string observation_layer;
    /// Rise-normalized max error on the observation plane (top cell level of
    /// the top active layer, sampled on the LF in-plane grid).
    double plane_error = 0.0;
    /// Informational: the same normalization over every LF cell, and the
    /// volume-weighted RMS difference relative to the max rise.
    double volume_max_error = 0.0;
    double volume_rms_error = 0.0;
    double rise_k = 0.0;
};

CostResult cost_comparison(const CostConfig& cfg);

nlohmann::json to_json(const StepResult& r);
nlohmann::json to_json(const std::vector<SweepPoint>& pts);
nlohmann::json to_json(const CostResult& r);
std::string to_csv(const StepResult& r);
std::string to_csv(const std::vector<SweepPoint>& pts);

}  // namespace thermkit::validate
