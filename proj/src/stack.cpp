#include "thermkit/stack.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "thermkit/error.hpp"

namespace thermkit {

double PackageStack::footprint_x() const noexcept {
    double w = 0.0;
    for (const Layer& l : layers) w = std::max(w, l.extent_x);
    return w;
}

double PackageStack::footprint_y() const noexcept {
    double w = 0.0;
    for (const Layer& l : layers) w = std::max(w, l.extent_y);
    return w;
}

double PackageStack::layer_origin_x(std::size_t i) const {
    return 0.5 * (footprint_x() - layers.at(i).extent_x);
}

double PackageStack::layer_origin_y(std::size_t i) const {
    return 0.5 * (footprint_y() - layers.at(i).extent_y);
}

double PackageStack::layer_z0(std::size_t i) const {
    double z = 0.0;
    for (std::size_t l = 0; l < i; ++l) z += layers.at(l).thickness;
    return z;
}

double PackageStack::height() const noexcept {
    double z = 0.0;
    for (const Layer& l : layers) z += l.thickness;
    return z;
}

double PackageStack::volume() const noexcept {
    double v = 0.0;
    for (const Layer& l : layers) v += l.thickness * l.extent_x * l.extent_y;
    return v;
}

std::optional<std::size_t> PackageStack::find_layer(const std::string& layer_name) const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].name == layer_name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> PackageStack::core_ids() const {
    std::vector<std::string> ids;
    for (const Layer& l : layers) {
        for (const CoreRegion& c : l.power_regions) ids.push_back(c.id);
    }
    return ids;
}

namespace {

void check_material(const Material& m, const std::string& where, const std::string& layer,
                    std::vector<Violation>& out) {
    if (!(m.k > 0.0) || !(m.rho > 0.0) || !(m.cp > 0.0)) {
        out.push_back({layer, "nonpositive material property",
                       where + " material '" + m.name + "' needs k, rho, cp > 0"});
    }
}

bool overlaps(const Rect& a, const Rect& b) {
    return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

}  // namespace

std::vector<Violation> validate_stack(const PackageStack& stack) {
    std::vector<Violation> out;
    if (stack.layers.empty()) {
        out.push_back({"", "no layers", "a stack needs at least one layer"});
    }

    auto check_bc = [&](const BoundaryCondition& bc, const char* which) {
        if (bc.kind == BoundaryCondition::Kind::Convective && !(bc.h > 0.0)) {
            out.push_back({"", "nonpositive h", std::string(which) + " convective boundary needs h > 0"});
        }
        if (bc.kind != BoundaryCondition::Kind::Adiabatic && !(bc.t_ref > 0.0)) {
            out.push_back({"", "nonpositive temperature",
                           std::string(which) + " boundary temperature must be positive kelvin"});
        }
    };
    check_bc(stack.bc_top, "top");
    check_bc(stack.bc_bottom, "bottom");
    if (stack.bc_top.kind == BoundaryCondition::Kind::Adiabatic &&
        stack.bc_bottom.kind == BoundaryCondition::Kind::Adiabatic) {
        out.push_back({"", "singular steady problem",
                       "all boundaries are adiabatic; the steady problem has no unique solution"});
    }

    std::set<std::string> names;
    std::set<std::string> core_ids;
    for (const Layer& layer : stack.layers) {
        const std::string& ln = layer.name;
        if (!names.insert(ln).second) {
            out.push_back({ln, "duplicate layer name", "layer names must be unique"});
        }
        if (!(layer.thickness > 0.0)) {
            out.push_back({ln, "nonpositive thickness", "thickness must be > 0"});
        }
        if (!(layer.extent_x > 0.0) || !(layer.extent_y > 0.0)) {
            out.push_back({ln, "nonpositive extent", "footprint extents must be > 0"});
        }
        check_material(layer.bulk, "bulk", ln, out);

        if (layer.array) {
            const InterconnectArray& a = *layer.array;
            check_material(a.core, "core", ln, out);
            check_material(a.shell, "shell", ln, out);
            check_material(a.matrix, "matrix", ln, out);
            if (!(a.pitch > 0.0) || a.count_x < 1 || a.count_y < 1) {
                out.push_back({ln, "degenerate array", "pitch must be > 0 and counts >= 1"});
            }
            if (a.r_core < 0.0 || a.t_shell < 0.0) {
                out.push_back({ln, "negative radius", "r_core and t_shell must be >= 0"});
            }
            if (!(a.r_outer() < 0.5 * a.pitch)) {
                std::ostringstream s;
                s << "r_core + t_shell = " << a.r_outer() << " m is not below pitch/2 = " << 0.5 * a.pitch
                  << " m";
                out.push_back({ln, "overlapping cylinders", s.str()});
            }
            // Tolerate last-ulp rounding when count * pitch equals the extent.
            const double slack = 1e-12 * std::max(layer.extent_x, layer.extent_y);
            if (a.span_x() > layer.extent_x + slack || a.span_y() > layer.extent_y + slack) {
                out.push_back({ln, "array exceeds layer extent", "count * pitch must fit in the footprint"});
            }
        }

        for (std::size_t i = 0; i < layer.power_regions.size(); ++i) {
            const CoreRegion& c = layer.power_regions[i];
            if (!core_ids.insert(c.id).second) {
                out.push_back({ln, "duplicate core id", "core id '" + c.id + "' appears twice"});
            }
            if (!(c.rect.x0 < c.rect.x1) || !(c.rect.y0 < c.rect.y1)) {
                out.push_back({ln, "degenerate region", "core '" + c.id + "' needs x0 < x1 and y0 < y1"});
                continue;
            }
            const double slack = 1e-12 * std::max(layer.extent_x, layer.extent_y);
            if (c.rect.x0 < -slack || c.rect.y0 < -slack || c.rect.x1 > layer.extent_x + slack ||
                c.rect.y1 > layer.extent_y + slack) {
                out.push_back({ln, "region outside footprint", "core '" + c.id + "' leaves the layer footprint"});
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (overlaps(c.rect, layer.power_regions[j].rect)) {
                    out.push_back({ln, "overlapping regions",
                                   "cores '" + layer.power_regions[j].id + "' and '" + c.id + "' overlap"});
                }
            }
        }
    }
    return out;
}

double stack_total_power(const PackageStack& stack, const PowerAssignment& assignment) {
    const std::vector<std::string> ids = stack.core_ids();
    const std::set<std::string> known(ids.begin(), ids.end());
    for (const auto& [id, w] : assignment.watts) {
        if (!known.count(id)) throw LookupError("unknown core id '" + id + "'");
    }
    double total = 0.0;
    for (const std::string& id : ids) {
        auto it = assignment.watts.find(id);
        if (it == assignment.watts.end()) throw LookupError("power assignment misses core id '" + id + "'");
        total += it->second;
    }
    return total;
}

}  // namespace thermkit
