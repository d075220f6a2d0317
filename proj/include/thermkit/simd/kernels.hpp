#pragma once

// Inner-loop kernels of the conjugate-gradient solver. Every kernel has a
// scalar reference in kernels_scalar.cpp and a vector variant per ISA; the
// table is picked once at runtime from CPU features and can be pinned with
// THERMKIT_SIMD={scalar,avx2}. Variants agree to rounding (see
// tests/unit/test_kernels.cpp), each is deterministic on its own.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace thermkit::simd {

/// Borrowed compressed-sparse-row matrix.
struct CsrView {
    std::span<const std::int64_t> row_ptr;  // size rows + 1
    std::span<const std::int32_t> col;
    std::span<const double> val;

    std::size_t rows() const noexcept { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }
};

struct DotPair {
    double rz = 0.0;
    double rr = 0.0;
};

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    std::string_view name;

    /// y = A x + shift .* x ; shift may be empty.
    void (*spmv)(const CsrView& a, std::span<const double> shift, std::span<const double> x, std::span<double> y);
    double (*dot)(std::span<const double> a, std::span<const double> b);
    /// x += alpha p ; r -= alpha ap
    void (*update)(double alpha, std::span<const double> p, std::span<const double> ap, std::span<double> x,
                   std::span<double> r);
    /// z = inv_diag .* r, returns (r.z, r.r)
    DotPair (*precondition)(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z);
    /// p = z + beta p
    void (*xpby)(std::span<const double> z, double beta, std::span<double> p);
};

const KernelTable& scalar_kernels();

/// True when the running CPU supports `isa` and the binary carries it.
bool isa_available(Isa isa);

/// Table for `isa`; throws std::runtime_error if unavailable.
const KernelTable& kernels_for(Isa isa);

/// Process-wide selection (env override, else best available).
const KernelTable& active_kernels();

}  // namespace thermkit::simd
