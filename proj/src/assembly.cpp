#include "thermkit/assembly.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "thermkit/error.hpp"

namespace thermkit {

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        if (static_cast<std::size_t>(col[k]) == j) return val[k];
    }
    return 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(rows(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i) d[i] = at(i, i);
    return d;
}

namespace {

struct Edge {
    std::int32_t i;
    std::int32_t j;
    double g;
};

double face(double area, double d1, double k1, double d2, double k2) {
    return area / (0.5 * d1 / k1 + 0.5 * d2 / k2);
}

double boundary_conductance(const BoundaryCondition& bc, double area, double dz, double kz) {
    const double half = 0.5 * dz / kz;
    if (bc.kind == BoundaryCondition::Kind::Convective) return area / (1.0 / bc.h + half);
    return area / half;
}

}  // namespace

SparseSystem assemble(const VoxelGrid& grid, const BoundaryCondition& bc_bottom, const BoundaryCondition& bc_top) {
    using Kind = BoundaryCondition::Kind;
    if (bc_bottom.kind == Kind::Adiabatic && bc_top.kind == Kind::Adiabatic) {
        throw SingularSystemError("all boundaries adiabatic: conductance matrix is singular");
    }
    if (grid.slabs.empty()) throw SingularSystemError("empty grid");
    const std::size_t n = grid.size();
    if (n > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw GeometryError("grid too large for 32-bit column indices");
    }

    std::vector<Edge> edges;
    edges.reserve(3 * n);
    auto add = [&](std::size_t a, std::size_t b, double g) {
        edges.push_back({static_cast<std::int32_t>(a), static_cast<std::int32_t>(b), g});
    };

    for (std::size_t l = 0; l < grid.slabs.size(); ++l) {
        const Slab& s = grid.slabs[l];
        for (int k = 0; k < s.nz; ++k) {
            for (int j = 0; j < s.ny; ++j) {
                for (int i = 0; i < s.nx; ++i) {
                    const std::size_t c = s.index(i, j, k);
                    if (i + 1 < s.nx) {
                        const std::size_t e = s.index(i + 1, j, k);
                        add(c, e, face(s.dy * s.dz, s.dx, grid.kx[c], s.dx, grid.kx[e]));
                    }
                    if (j + 1 < s.ny) {
                        const std::size_t e = s.index(i, j + 1, k);
                        add(c, e, face(s.dx * s.dz, s.dy, grid.ky[c], s.dy, grid.ky[e]));
                    }
                    if (k + 1 < s.nz) {
                        const std::size_t e = s.index(i, j, k + 1);
                        add(c, e, face(s.dx * s.dy, s.dz, grid.kz[c], s.dz, grid.kz[e]));
                    }
                }
            }
        }
        if (l + 1 < grid.slabs.size()) {
            const Slab& u = grid.slabs[l + 1];
            const auto ox = overlaps_1d(s.x0, s.dx, s.nx, u.x0, u.dx, u.nx);
            const auto oy = overlaps_1d(s.y0, s.dy, s.ny, u.y0, u.dy, u.ny);
            for (const Overlap& wy : oy) {
                for (const Overlap& wx : ox) {
                    const std::size_t c = s.index(wx.src, wy.src, s.nz - 1);
                    const std::size_t e = u.index(wx.dst, wy.dst, 0);
                    add(c, e, face(wx.length * wy.length, s.dz, grid.kz[c], u.dz, grid.kz[e]));
                }
            }
        }
    }

    SparseSystem sys;
    sys.b_bc.assign(n, 0.0);
    sys.volume = grid.cell_volumes();
    sys.capacitance.resize(n);
    for (std::size_t c = 0; c < n; ++c) sys.capacitance[c] = grid.cv[c] * sys.volume[c];

    std::vector<double> diag(n, 0.0);
    auto add_boundary = [&](const BoundaryCondition& bc, const Slab& s, int k) {
        if (bc.kind == Kind::Adiabatic) return;
        for (int j = 0; j < s.ny; ++j) {
            for (int i = 0; i < s.nx; ++i) {
                const std::size_t c = s.index(i, j, k);
                const double g = boundary_conductance(bc, s.dx * s.dy, s.dz, grid.kz[c]);
                diag[c] += g;
                sys.b_bc[c] += g * bc.t_ref;
                sys.boundary.push_back({c, g, bc.t_ref});
            }
        }
    };
    add_boundary(bc_bottom, grid.slabs.front(), 0);
    add_boundary(bc_top, grid.slabs.back(), grid.slabs.back().nz - 1);

    std::vector<std::int64_t> count(n, 1);
    for (const Edge& e : edges) {
        ++count[e.i];
        ++count[e.j];
        diag[e.i] += e.g;
        diag[e.j] += e.g;
    }
    CsrMatrix& a = sys.a;
    a.row_ptr.assign(n + 1, 0);
    std::partial_sum(count.begin(), count.end(), a.row_ptr.begin() + 1);
    a.col.resize(a.row_ptr[n]);
    a.val.resize(a.row_ptr[n]);
    std::vector<std::int64_t> fill(a.row_ptr.begin(), a.row_ptr.end() - 1);
    for (std::size_t c = 0; c < n; ++c) {
        a.col[fill[c]] = static_cast<std::int32_t>(c);
        a.val[fill[c]++] = diag[c];
    }
    for (const Edge& e : edges) {
        a.col[fill[e.i]] = e.j;
        a.val[fill[e.i]++] = -e.g;
        a.col[fill[e.j]] = e.i;
        a.val[fill[e.j]++] = -e.g;
    }
    std::vector<std::pair<std::int32_t, double>> row;
    for (std::size_t c = 0; c < n; ++c) {
        const auto lo = a.row_ptr[c], hi = a.row_ptr[c + 1];
        row.clear();
        for (auto k = lo; k < hi; ++k) row.emplace_back(a.col[k], a.val[k]);
        std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto k = lo; k < hi; ++k) {
            a.col[k] = row[k - lo].first;
            a.val[k] = row[k - lo].second;
        }
    }
    return sys;
}

}  // namespace thermkit
