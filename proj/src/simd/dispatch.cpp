#include <cstdlib>
#include <string_view>

#include "kgc/error.hpp"
#include "kgc/simd/kernels.hpp"

namespace kgc::simd {

const char* to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

bool available(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
            return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::Neon: return neon_kernels() != nullptr;
    }
    return false;
}

const Kernels& kernels_for(Isa isa) {
    if (!available(isa)) {
        throw Error(ErrorKind::InvalidArgument, "simd", std::string("kernel variant unavailable: ") + to_string(isa));
    }
    switch (isa) {
        case Isa::Avx2: return *avx2_kernels();
        case Isa::Neon: return *neon_kernels();
        case Isa::Scalar: break;
    }
    return scalar_kernels();
}

namespace {

const Kernels& select() noexcept {
    if (const char* env = std::getenv("KGC_SIMD")) {
        const std::string_view want(env);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
            if (want == to_string(isa) && available(isa)) return kernels_for(isa);
        }
    }
    if (available(Isa::Avx2)) return *avx2_kernels();
    if (available(Isa::Neon)) return *neon_kernels();
    return scalar_kernels();
}

}  // namespace

const Kernels& active() noexcept {
    static const Kernels& chosen = select();
    return chosen;
}

}  // namespace kgc::simd
