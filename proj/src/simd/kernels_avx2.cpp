// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "thermkit/simd/kernels.hpp"

namespace thermkit::simd {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void spmv(const CsrView& a, std::span<const double> shift, std::span<const double> x, std::span<double> y) {
    const std::size_t n = a.rows();
    const double* xp = x.data();
    const std::int32_t* col = a.col.data();
    const double* val = a.val.data();
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t k = a.row_ptr[i];
        const std::int64_t end = a.row_ptr[i + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + k));
            const __m256d xv = _mm256_i32gather_pd(xp, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + k), xv, acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += val[k] * xp[col[k]];
        if (!shift.empty()) s += shift[i] * xp[i];
        y[i] = s;
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i + 4]), _mm256_loadu_pd(&b[i + 4]), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void update(double alpha, std::span<const double> p, std::span<const double> ap, std::span<double> x,
            std::span<double> r) {
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(&x[i], _mm256_fmadd_pd(va, _mm256_loadu_pd(&p[i]), _mm256_loadu_pd(&x[i])));
        _mm256_storeu_pd(&r[i], _mm256_fnmadd_pd(va, _mm256_loadu_pd(&ap[i]), _mm256_loadu_pd(&r[i])));
    }
    for (; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
    }
}

DotPair precondition(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z) {
    const std::size_t n = r.size();
    __m256d rz = _mm256_setzero_pd();
    __m256d rr = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d rv = _mm256_loadu_pd(&r[i]);
        const __m256d zv = _mm256_mul_pd(_mm256_loadu_pd(&inv_diag[i]), rv);
        _mm256_storeu_pd(&z[i], zv);
        rz = _mm256_fmadd_pd(rv, zv, rz);
        rr = _mm256_fmadd_pd(rv, rv, rr);
    }
    DotPair d{hsum(rz), hsum(rr)};
    for (; i < n; ++i) {
        z[i] = inv_diag[i] * r[i];
        d.rz += r[i] * z[i];
        d.rr += r[i] * r[i];
    }
    return d;
}

void xpby(std::span<const double> z, double beta, std::span<double> p) {
    const std::size_t n = p.size();
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(&p[i], _mm256_fmadd_pd(vb, _mm256_loadu_pd(&p[i]), _mm256_loadu_pd(&z[i])));
    }
    for (; i < n; ++i) p[i] = z[i] + beta * p[i];
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{Isa::Avx2, "avx2", spmv, dot, update, precondition, xpby};
    return table;
}

}  // namespace thermkit::simd
