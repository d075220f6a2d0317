#include "thermkit/emt.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "thermkit/error.hpp"

namespace thermkit::emt {

VolumeFractions volume_fractions(const InterconnectArray& array) {
    const double cell = array.pitch * array.pitch;
    const double r_in = array.r_core;
    const double r_out = array.r_outer();
    VolumeFractions f;
    f.core = std::numbers::pi * r_in * r_in / cell;
    f.shell = std::numbers::pi * (r_out * r_out - r_in * r_in) / cell;
    f.matrix = 1.0 - f.core - f.shell;
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(cell > 0.0) || !in_unit(f.core) || !in_unit(f.shell) || !in_unit(f.matrix)) {
        std::ostringstream s;
        s << "volume fractions out of [0,1]: core=" << f.core << " shell=" << f.shell << " matrix=" << f.matrix;
        throw GeometryError(s.str());
    }
    return f;
}

double k_vertical(const VolumeFractions& f, double k_core, double k_shell, double k_matrix) {
    return f.core * k_core + f.shell * k_shell + f.matrix * k_matrix;
}

namespace {

// Shared rational form of both lateral steps:
//   k_host * (k_in + k_host + v (k_in - k_host)) / (k_in + k_host - v (k_in - k_host))
double maxwell_ratio(double k_in, double k_host, double v, const char* what) {
    const double sum = k_in + k_host;
    const double diff = k_in - k_host;
    const double den = sum - v * diff;
    if (!(den > 0.0)) {
        std::ostringstream s;
        s << what << ": nonpositive denominator for k_in=" << k_in << " k_host=" << k_host << " v=" << v;
        throw SingularFormulaError(s.str());
    }
    // Collapse cases are returned exactly rather than through the division.
    if (v == 0.0) return k_host;
    if (v == 1.0) return k_in;
    return k_host * (sum + v * diff) / den;
}

}  // namespace

double k_inclusion(double k_core, double k_shell, double v_core) {
    if (!(v_core >= 0.0 && v_core <= 1.0)) {
        throw GeometryError("v_core must lie in [0,1]");
    }
    return maxwell_ratio(k_core, k_shell, v_core, "equivalent inclusion");
}

double k_lateral(double k_inc, double k_matrix, double f_inclusion) {
    if (!(f_inclusion >= 0.0 && f_inclusion <= 1.0)) {
        throw GeometryError("inclusion fraction must lie in [0,1]");
    }
    return maxwell_ratio(k_inc, k_matrix, f_inclusion, "Maxwell-Eucken");
}

double cv_effective(const VolumeFractions& f, double cv_core, double cv_shell, double cv_matrix) {
    return f.core * cv_core + f.shell * cv_shell + f.matrix * cv_matrix;
}

EquivalentLayer homogenize_layer(const Layer& layer) {
    if (!layer.array) {
        throw GeometryError("layer '" + layer.name + "' has no interconnect array to homogenize");
    }
    const InterconnectArray& a = *layer.array;
    const VolumeFractions f = volume_fractions(a);

    double k_inc = a.core.k;
    if (a.t_shell > 0.0) {
        const double ratio = a.r_core / a.r_outer();
        k_inc = k_inclusion(a.core.k, a.shell.k, ratio * ratio);
    }

    EquivalentLayer eq;
    eq.k_z = k_vertical(f, a.core.k, a.shell.k, a.matrix.k);
    eq.k_x = k_lateral(k_inc, a.matrix.k, f.inclusion());
    eq.k_y = eq.k_x;
    eq.c_v = cv_effective(f, a.core.cv(), a.shell.cv(), a.matrix.cv());
    return eq;
}

bool outside_validated_range(const Layer& layer) {
    return layer.array && volume_fractions(*layer.array).inclusion() > kValidatedInclusionFraction;
}

}  // namespace thermkit::emt
