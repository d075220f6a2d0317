#pragma once

#include <cstdint>
#include <vector>

#include "thermkit/grid.hpp"
#include "thermkit/simd/kernels.hpp"

namespace thermkit {

/// Owning CSR matrix with sorted column indices per row.
struct CsrMatrix {
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;

    std::size_t rows() const noexcept { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }
    std::size_t nnz() const noexcept { return val.size(); }
    simd::CsrView view() const noexcept { return {row_ptr, col, val}; }
    /// Entry (i, j) or 0 if not stored. O(row length).
    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;
};

/// Conductance between a boundary cell and its fixed reference temperature.
struct BoundaryLink {
    std::size_t cell = 0;
    double conductance = 0.0;  // W/K
    double t_ref = 0.0;        // K
};

/// Finite-volume system A T = q V + b_bc with capacitance diagonal C.
/// Rows are voxel indices of the source grid (the index map is the identity).
struct SparseSystem {
    CsrMatrix a;                        // W/K
    std::vector<double> b_bc;           // W
    std::vector<double> capacitance;    // J/K
    std::vector<double> volume;         // m^3
    std::vector<BoundaryLink> boundary;

    std::size_t size() const noexcept { return a.rows(); }
};

/// Seven-point conduction stencil (general overlap coupling across slab
/// interfaces). Face conductance is A / (d1 / (2 k1) + d2 / (2 k2)) with each
/// cell's axis-aligned k. Convective faces couple the cell centre to t_inf
/// through A / (1/h + d / (2 k)); Dirichlet faces through A / (d / (2 k)).
/// Throws SingularSystemError when both boundaries are adiabatic.
SparseSystem assemble(const VoxelGrid& grid, const BoundaryCondition& bc_bottom, const BoundaryCondition& bc_top);

inline SparseSystem assemble(const VoxelGrid& grid, const PackageStack& stack) {
    return assemble(grid, stack.bc_bottom, stack.bc_top);
}

}  // namespace thermkit
