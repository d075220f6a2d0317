#pragma once

#include "thermkit/stack.hpp"

namespace thermkit::emt {

/// Volume fractions of one square unit cell (pitch x pitch) of an array.
struct VolumeFractions {
    double core = 0.0;
    double shell = 0.0;
    double matrix = 1.0;

    double inclusion() const noexcept { return core + shell; }
};

/// Homogenized anisotropic layer properties. k_x == k_y always.
struct EquivalentLayer {
    double k_x = 0.0;  // W/(m K)
    double k_y = 0.0;
    double k_z = 0.0;
    double c_v = 0.0;  // J/(m^3 K)
};

/// Upper end of the inclusion fraction range the homogenization has been
/// validated over. Layers beyond it still homogenize but are flagged.
inline constexpr double kValidatedInclusionFraction = 0.5;

VolumeFractions volume_fractions(const InterconnectArray& array);

/// Parallel mixing rule for conduction along the pillars.
double k_vertical(const VolumeFractions& f, double k_core, double k_shell, double k_matrix);

/// Core-shell cylinder collapsed to a single equivalent inclusion, with
/// v_core = (r_core / r_outer)^2. Throws SingularFormulaError when the
/// denominator is not positive.
double k_inclusion(double k_core, double k_shell, double v_core);

/// Two-dimensional Maxwell-Eucken model for in-plane conduction of
/// cylinders of conductivity `k_inc` occupying `f_inclusion` of the matrix.
double k_lateral(double k_inc, double k_matrix, double f_inclusion);

/// Volume-averaged heat capacity.
double cv_effective(const VolumeFractions& f, double cv_core, double cv_shell, double cv_matrix);

/// Composes the pieces for an array-bearing layer. Bumps (t_shell == 0) use
/// the core conductivity directly as the inclusion. Throws GeometryError if
/// the layer has no array.
EquivalentLayer homogenize_layer(const Layer& layer);

/// True when the layer's inclusion fraction lies outside the validated range.
bool outside_validated_range(const Layer& layer);

}  // namespace thermkit::emt
