#pragma once

// Elementwise kernels behind the lattice sweep and the oracle stencil.
// Every variant performs the same operations in the same order, so scalar,
// AVX2 and NEON results agree bit for bit (the build disables FP contraction).

#include <cstddef>

namespace kgc::simd {

enum class Isa { Scalar, Avx2, Neon };

const char* to_string(Isa isa) noexcept;

struct OracleRowArgs {
    const double* u;      ///< current level, points at row 1
    const double* um;     ///< previous level, points at row 1
    const double* beta;   ///< mixed-term weights, row 1
    const double* c;      ///< u_yy coefficient, row 1
    const double* d;      ///< u_y coefficient, row 1
    double dt2;
    double inv_dy2;
    double inv_2dy;
    double m2;
    double* out;          ///< right-hand side, row 1
    std::size_t n;        ///< interior rows
};

struct Kernels {
    Isa isa;

    /// out[i] = scale * w[i] * ((a[i+1] + a[i]) + (b[i+1] + b[i])), reading a, b at [0, n].
    void (*cell_integrals)(const double* a, const double* b, const double* w, double scale, double* out,
                           std::size_t n);
    /// out[i] = a[i] + b[i]
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    /// out[i] = (g[i] - gu) - I[i]
    void (*field)(const double* g, double gu, const double* I, double* out, std::size_t n);
    /// out[i] = s * ((g[i] - gu) + psi[i])
    void (*source)(const double* g, double gu, const double* psi, double s, double* out, std::size_t n);
    /// max |a[i] - b[i]|; NaN entries are skipped.
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
    /// rhs = (2u - um) + beta (um+ - um-) - dt2 (c (u+ - 2u + u-) inv_dy2 + d (u+ - u-) inv_2dy + m2 u)
    void (*oracle_rhs)(const OracleRowArgs& args);
};

const Kernels& scalar_kernels() noexcept;
/// nullptr when the variant was not compiled in.
const Kernels* avx2_kernels() noexcept;
const Kernels* neon_kernels() noexcept;

/// Compiled in and supported by the running CPU.
bool available(Isa isa) noexcept;

/// Throws Error{InvalidArgument} when unavailable.
const Kernels& kernels_for(Isa isa);

/// Best available variant; KGC_SIMD=scalar|avx2|neon overrides.
const Kernels& active() noexcept;

}  // namespace kgc::simd
