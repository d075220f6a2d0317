#include "thermkit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "thermkit/emt.hpp"
#include "thermkit/error.hpp"

namespace thermkit {

std::string to_string(Fidelity f) { return f == Fidelity::High ? "high" : "low"; }

Fidelity fidelity_from_string(const std::string& s) {
    if (s == "high" || s == "HIGH" || s == "hf") return Fidelity::High;
    if (s == "low" || s == "LOW" || s == "lf") return Fidelity::Low;
    throw LookupError("unknown fidelity '" + s + "' (expected high or low)");
}

const Slab& VoxelGrid::slab_of(std::size_t cell) const {
    auto it = std::upper_bound(slabs.begin(), slabs.end(), cell,
                               [](std::size_t c, const Slab& s) { return c < s.offset; });
    if (it == slabs.begin()) throw std::out_of_range("cell index out of range");
    return *std::prev(it);
}

std::vector<double> VoxelGrid::cell_volumes() const {
    std::vector<double> v(size());
    for (const Slab& s : slabs) std::fill_n(v.begin() + s.offset, s.cells(), s.cell_volume());
    return v;
}

double VoxelGrid::total_volume() const {
    double v = 0.0;
    for (const Slab& s : slabs) v += s.cell_volume() * static_cast<double>(s.cells());
    return v;
}

std::vector<Overlap> overlaps_1d(double a0, double da, int na, double b0, double db, int nb) {
    std::vector<Overlap> out;
    int i = 0;
    int j = 0;
    const double eps = 1e-12 * std::max(da, db);
    while (i < na && j < nb) {
        const double a_lo = a0 + da * i, a_hi = a0 + da * (i + 1);
        const double b_lo = b0 + db * j, b_hi = b0 + db * (j + 1);
        const double len = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
        if (len > eps) out.push_back({i, j, len});
        if (a_hi < b_hi) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

namespace {

struct CellProps {
    double kx, ky, kz, cv;
};

// Material properties at a layer-local in-plane point.
using Sampler = std::function<CellProps(double x, double y)>;

CellProps iso(const Material& m) { return {m.k, m.k, m.k, m.cv()}; }

// Squared distance from (x, y) to the nearest cylinder axis of a centered
// array; false outside the array bounding box.
bool array_offset(const InterconnectArray& a, double extent_x, double extent_y, double x, double y, double& r2) {
    const double ax0 = 0.5 * (extent_x - a.span_x());
    const double ay0 = 0.5 * (extent_y - a.span_y());
    const double u = x - ax0;
    const double v = y - ay0;
    if (u < 0.0 || v < 0.0 || u >= a.span_x() || v >= a.span_y()) return false;
    const int ix = std::min(a.count_x - 1, static_cast<int>(u / a.pitch));
    const int iy = std::min(a.count_y - 1, static_cast<int>(v / a.pitch));
    const double cx = (ix + 0.5) * a.pitch;
    const double cy = (iy + 0.5) * a.pitch;
    r2 = (u - cx) * (u - cx) + (v - cy) * (v - cy);
    return true;
}

Sampler resolved_sampler(const Layer& layer) {
    if (!layer.array) {
        return [p = iso(layer.bulk)](double, double) { return p; };
    }
    return [&layer](double x, double y) {
        const InterconnectArray& a = *layer.array;
        double r2 = 0.0;
        if (!array_offset(a, layer.extent_x, layer.extent_y, x, y, r2)) return iso(layer.bulk);
        if (r2 < a.r_core * a.r_core) return iso(a.core);
        if (r2 < a.r_outer() * a.r_outer()) return iso(a.shell);
        return iso(a.matrix);
    };
}

Sampler homogenized_sampler(const Layer& layer) {
    if (!layer.array) {
        return [p = iso(layer.bulk)](double, double) { return p; };
    }
    const emt::EquivalentLayer eq = emt::homogenize_layer(layer);
    const CellProps eqp{eq.k_x, eq.k_y, eq.k_z, eq.c_v};
    return [&layer, eqp](double x, double y) {
        const InterconnectArray& a = *layer.array;
        const double ax0 = 0.5 * (layer.extent_x - a.span_x());
        const double ay0 = 0.5 * (layer.extent_y - a.span_y());
        const bool inside = x >= ax0 && y >= ay0 && x < ax0 + a.span_x() && y < ay0 + a.span_y();
        return inside ? eqp : iso(layer.bulk);
    };
}

int axis_cells(double extent, double cells_per_mm, int max_cells) {
    const long n = std::lround(to_mm(extent) * cells_per_mm);
    return static_cast<int>(std::clamp<long>(n, 1, max_cells));
}

struct LayerMeshing {
    int nx, ny, nz;
    Sampler sampler;
};

VoxelGrid build(const PackageStack& stack, Fidelity fidelity, int subsamples,
                const std::function<LayerMeshing(std::size_t)>& per_layer) {
    const auto violations = validate_stack(stack);
    if (!violations.empty()) {
        const Violation& v = violations.front();
        throw GeometryError("invalid stack: " + (v.layer.empty() ? "" : v.layer + ": ") + v.rule + " (" +
                            v.detail + ")");
    }
    if (subsamples < 1) throw GeometryError("subsamples must be >= 1");

    VoxelGrid g;
    g.fidelity = fidelity;
    g.stack_name = stack.name;
    std::size_t offset = 0;
    std::vector<Sampler> samplers;
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        const Layer& layer = stack.layers[l];
        LayerMeshing m = per_layer(l);
        Slab s;
        s.layer = l;
        s.x0 = stack.layer_origin_x(l);
        s.y0 = stack.layer_origin_y(l);
        s.z0 = stack.layer_z0(l);
        s.nx = m.nx;
        s.ny = m.ny;
        s.nz = m.nz;
        s.dx = layer.extent_x / m.nx;
        s.dy = layer.extent_y / m.ny;
        s.dz = layer.thickness / m.nz;
        s.offset = offset;
        offset += s.cells();
        g.slabs.push_back(s);
        samplers.push_back(std::move(m.sampler));
    }
    g.kx.resize(offset);
    g.ky.resize(offset);
    g.kz.resize(offset);
    g.cv.resize(offset);
    g.q.assign(offset, 0.0);

    const double inv = 1.0 / (subsamples * subsamples);
    for (std::size_t l = 0; l < g.slabs.size(); ++l) {
        const Slab& s = g.slabs[l];
        const Sampler& sample = samplers[l];
        for (int j = 0; j < s.ny; ++j) {
            for (int i = 0; i < s.nx; ++i) {
                CellProps acc{0.0, 0.0, 0.0, 0.0};
                for (int sj = 0; sj < subsamples; ++sj) {
                    for (int si = 0; si < subsamples; ++si) {
                        const double x = s.dx * (i + (si + 0.5) / subsamples);
                        const double y = s.dy * (j + (sj + 0.5) / subsamples);
                        const CellProps p = sample(x, y);
                        acc.kx += p.kx;
                        acc.ky += p.ky;
                        acc.kz += p.kz;
                        acc.cv += p.cv;
                    }
                }
                for (int k = 0; k < s.nz; ++k) {
                    const std::size_t c = s.index(i, j, k);
                    g.kx[c] = acc.kx * inv;
                    g.ky[c] = acc.ky * inv;
                    g.kz[c] = acc.kz * inv;
                    g.cv[c] = acc.cv * inv;
                }
            }
        }
    }
    return g;
}

}  // namespace

VoxelGrid build_hf_mesh(const PackageStack& stack, const HfResolution& res) {
    if (res.z_cells_per_layer < 1) throw GeometryError("z_cells_per_layer must be >= 1");
    return build(stack, Fidelity::High, res.subsamples, [&](std::size_t l) {
        const Layer& layer = stack.layers[l];
        LayerMeshing m;
        m.nx = axis_cells(layer.extent_x, res.cells_per_mm, res.max_cells_per_axis);
        m.ny = axis_cells(layer.extent_y, res.cells_per_mm, res.max_cells_per_axis);
        m.nz = std::max(res.z_cells_per_layer,
                        static_cast<int>(std::ceil(to_mm(layer.thickness) * res.z_cells_per_mm - 1e-9)));
        if (layer.array) {
            const InterconnectArray& a = *layer.array;
            const double r = a.r_core > 0.0 ? a.r_core : a.r_outer();
            const double dx = layer.extent_x / m.nx;
            const double dy = layer.extent_y / m.ny;
            // Two cells across the radius, with slack for the mm -> m rounding.
            if (r < 2.0 * std::max(dx, dy) * (1.0 - 1e-9)) {
                std::ostringstream msg;
                msg << "layer '" << layer.name << "': array core radius " << to_mm(r) << " mm spans only "
                    << r / std::max(dx, dy) << " cells (need >= 2); raise cells_per_mm or max_cells_per_axis";
                throw GeometryError(msg.str());
            }
        }
        m.sampler = resolved_sampler(layer);
        return m;
    });
}

VoxelGrid build_lf_mesh(const PackageStack& stack, const LfResolution& res) {
    return build(stack, Fidelity::Low, res.subsamples, [&](std::size_t l) {
        const Layer& layer = stack.layers[l];
        LayerMeshing m;
        m.nx = axis_cells(layer.extent_x, res.cells_per_mm, res.max_cells_per_axis);
        m.ny = axis_cells(layer.extent_y, res.cells_per_mm, res.max_cells_per_axis);
        if (res.z_cells_per_layer > 0) {
            m.nz = res.z_cells_per_layer;
        } else {
            m.nz = std::clamp(static_cast<int>(std::ceil(layer.thickness / mm(0.1) - 1e-9)), 1, 4);
        }
        m.sampler = homogenized_sampler(layer);
        return m;
    });
}

namespace {

// Adds the assignment's source density into q.
void add_power(const VoxelGrid& grid, const PackageStack& stack, const PowerAssignment& assignment,
               std::vector<double>& q) {
    // Reject ids the stack does not know and missing ones.
    (void)stack_total_power(stack, assignment);
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        const Layer& layer = stack.layers[l];
        const Slab& s = grid.slabs.at(l);
        for (const CoreRegion& c : layer.power_regions) {
            const double watts = assignment.watts.at(c.id);
            const auto ox = overlaps_1d(s.x0 + c.rect.x0, c.rect.width(), 1, s.x0, s.dx, s.nx);
            const auto oy = overlaps_1d(s.y0 + c.rect.y0, c.rect.height(), 1, s.y0, s.dy, s.ny);
            if (ox.empty() || oy.empty()) {
                throw GeometryError("core '" + c.id + "' intersects no voxel");
            }
            if (watts == 0.0) continue;
            const double scale = watts / (c.rect.area() * layer.thickness * s.dx * s.dy);
            for (const Overlap& wy : oy) {
                for (const Overlap& wx : ox) {
                    const double density = scale * wx.length * wy.length;
                    for (int k = 0; k < s.nz; ++k) q[s.index(wx.dst, wy.dst, k)] += density;
                }
            }
        }
    }
}

}  // namespace

void rasterize_power(VoxelGrid& grid, const PackageStack& stack, const PowerAssignment& assignment) {
    std::vector<double> q(grid.size(), 0.0);
    add_power(grid, stack, assignment, q);
    grid.q = std::move(q);
}

std::size_t SourceSchedule::segment_at(double t) const {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < t_start.size(); ++i) {
        if (t_start[i] <= t) idx = i;
    }
    return idx;
}

SourceSchedule rasterize_waveform(const VoxelGrid& grid, const PackageStack& stack, const PowerWaveform& waveform) {
    SourceSchedule sched;
    for (const auto& seg : waveform.segments) {
        std::vector<double> q(grid.size(), 0.0);
        add_power(grid, stack, seg.power, q);
        sched.t_start.push_back(seg.t_start);
        sched.q.push_back(std::move(q));
    }
    return sched;
}

std::vector<double> resample_to(const VoxelGrid& src, std::span<const double> field, const VoxelGrid& dst) {
    if (src.slabs.size() != dst.slabs.size()) throw GeometryError("grids come from different stacks");
    if (field.size() != src.size()) throw GeometryError("field size does not match source grid");
    std::vector<double> out(dst.size(), 0.0);
    for (std::size_t l = 0; l < src.slabs.size(); ++l) {
        const Slab& a = src.slabs[l];
        const Slab& b = dst.slabs[l];
        const auto ox = overlaps_1d(a.x0, a.dx, a.nx, b.x0, b.dx, b.nx);
        const auto oy = overlaps_1d(a.y0, a.dy, a.ny, b.y0, b.dy, b.ny);
        const auto oz = overlaps_1d(a.z0, a.dz, a.nz, b.z0, b.dz, b.nz);
        for (const Overlap& wz : oz) {
            for (const Overlap& wy : oy) {
                const double wyz = wy.length * wz.length;
                for (const Overlap& wx : ox) {
                    out[b.index(wx.dst, wy.dst, wz.dst)] += field[a.index(wx.src, wy.src, wz.src)] * wx.length * wyz;
                }
            }
        }
        const double inv = 1.0 / b.cell_volume();
        for (std::size_t c = b.offset; c < b.offset + b.cells(); ++c) out[c] *= inv;
    }
    return out;
}

std::vector<double> top_plane(const VoxelGrid& grid, std::span<const double> field, std::size_t layer, int h,
                              int w) {
    if (h < 1 || w < 1) throw GeometryError("export grid must be at least 1x1");
    if (field.size() != grid.size()) throw GeometryError("field size does not match grid");
    const Slab& s = grid.slabs.at(layer);
    const double bx = s.dx * s.nx / w;
    const double by = s.dy * s.ny / h;
    const auto ox = overlaps_1d(s.x0, s.dx, s.nx, s.x0, bx, w);
    const auto oy = overlaps_1d(s.y0, s.dy, s.ny, s.y0, by, h);
    std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
    const int k = s.nz - 1;
    for (const Overlap& wy : oy) {
        for (const Overlap& wx : ox) {
            out[static_cast<std::size_t>(wy.dst) * w + wx.dst] +=
                field[s.index(wx.src, wy.src, k)] * wx.length * wy.length;
        }
    }
    const double inv = 1.0 / (bx * by);
    for (double& v : out) v *= inv;
    return out;
}

}  // namespace thermkit
