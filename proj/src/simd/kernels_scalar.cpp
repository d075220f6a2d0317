#include "thermkit/simd/kernels.hpp"

namespace thermkit::simd {

namespace {

void spmv(const CsrView& a, std::span<const double> shift, std::span<const double> x, std::span<double> y) {
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.val[k] * x[a.col[k]];
        if (!shift.empty()) acc += shift[i] * x[i];
        y[i] = acc;
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void update(double alpha, std::span<const double> p, std::span<const double> ap, std::span<double> x,
            std::span<double> r) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
    }
}

DotPair precondition(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z) {
    DotPair d;
    for (std::size_t i = 0; i < r.size(); ++i) {
        z[i] = inv_diag[i] * r[i];
        d.rz += r[i] * z[i];
        d.rr += r[i] * r[i];
    }
    return d;
}

void xpby(std::span<const double> z, double beta, std::span<double> p) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::Scalar, "scalar", spmv, dot, update, precondition, xpby};
    return table;
}

}  // namespace thermkit::simd
