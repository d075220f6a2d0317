#include <cstdlib>
#include <stdexcept>
#include <string>

#include "thermkit/simd/kernels.hpp"

namespace thermkit::simd {

#if defined(THERMKIT_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(THERMKIT_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_available(isa)) throw std::runtime_error("requested SIMD kernels are not available on this CPU");
#if defined(THERMKIT_HAVE_AVX2)
    if (isa == Isa::Avx2) return avx2_kernels();
#endif
    return scalar_kernels();
}

namespace {

const KernelTable& select() {
    const char* env = std::getenv("THERMKIT_SIMD");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2") return kernels_for(Isa::Avx2);
    if (isa_available(Isa::Avx2)) return kernels_for(Isa::Avx2);
    return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace thermkit::simd
