#include "kgc/simd/kernels.hpp"

namespace kgc::simd {

namespace {

void cell_integrals(const double* a, const double* b, const double* w, double scale, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * w[i] * ((a[i + 1] + a[i]) + (b[i + 1] + b[i]));
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void field(const double* g, double gu, const double* I, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (g[i] - gu) - I[i];
}

void source(const double* g, double gu, const double* psi, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = s * ((g[i] - gu) + psi[i]);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
        m = d > m ? d : m;
    }
    return m;
}

void oracle_rhs(const OracleRowArgs& r) {
    for (std::size_t i = 0; i < r.n; ++i) {
        const double up = r.u[i + 1];
        const double uc = r.u[i];
        const double un = r.u[i - 1];
        const double lap = ((up - uc) - (uc - un)) * r.inv_dy2;
        const double grad = (up - un) * r.inv_2dy;
        const double op = (r.c[i] * lap + r.d[i] * grad) + r.m2 * uc;
        r.out[i] = ((uc + uc) - r.um[i]) + r.beta[i] * (r.um[i + 1] - r.um[i - 1]) - r.dt2 * op;
    }
}

constexpr Kernels kScalar{Isa::Scalar, cell_integrals, add, field, source, max_abs_diff, oracle_rhs};

}  // namespace

const Kernels& scalar_kernels() noexcept { return kScalar; }

}  // namespace kgc::simd
