#include "kgc/simd/kernels.hpp"

#if defined(__x86_64__) && defined(KGC_HAVE_AVX2)

#include <immintrin.h>

namespace kgc::simd {

namespace {

void cell_integrals(const double* a, const double* b, const double* w, double scale, double* out, std::size_t n) {
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = _mm256_loadu_pd(a + i);
        const __m256d a1 = _mm256_loadu_pd(a + i + 1);
        const __m256d b0 = _mm256_loadu_pd(b + i);
        const __m256d b1 = _mm256_loadu_pd(b + i + 1);
        const __m256d sum = _mm256_add_pd(_mm256_add_pd(a1, a0), _mm256_add_pd(b1, b0));
        const __m256d sw = _mm256_mul_pd(s, _mm256_loadu_pd(w + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(sw, sum));
    }
    for (; i < n; ++i) out[i] = scale * w[i] * ((a[i + 1] + a[i]) + (b[i + 1] + b[i]));
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void field(const double* g, double gu, const double* I, double* out, std::size_t n) {
    const __m256d vu = _mm256_set1_pd(gu);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(g + i), vu);
        _mm256_storeu_pd(out + i, _mm256_sub_pd(d, _mm256_loadu_pd(I + i)));
    }
    for (; i < n; ++i) out[i] = (g[i] - gu) - I[i];
}

void source(const double* g, double gu, const double* psi, double s, double* out, std::size_t n) {
    const __m256d vu = _mm256_set1_pd(gu);
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(g + i), vu);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_add_pd(d, _mm256_loadu_pd(psi + i))));
    }
    for (; i < n; ++i) out[i] = s * ((g[i] - gu) + psi[i]);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        // max_pd returns the second operand when either is NaN, so NaN lanes keep m.
        m = _mm256_max_pd(d, m);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = 0.0;
    for (double v : lanes) r = v > r ? v : r;
    for (; i < n; ++i) {
        const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
        r = d > r ? d : r;
    }
    return r;
}

void oracle_rhs(const OracleRowArgs& r) {
    const __m256d dt2 = _mm256_set1_pd(r.dt2);
    const __m256d idy2 = _mm256_set1_pd(r.inv_dy2);
    const __m256d i2dy = _mm256_set1_pd(r.inv_2dy);
    const __m256d m2 = _mm256_set1_pd(r.m2);
    std::size_t i = 0;
    for (; i + 4 <= r.n; i += 4) {
        const __m256d up = _mm256_loadu_pd(r.u + i + 1);
        const __m256d uc = _mm256_loadu_pd(r.u + i);
        const __m256d un = _mm256_loadu_pd(r.u + i - 1);
        const __m256d lap = _mm256_mul_pd(_mm256_sub_pd(_mm256_sub_pd(up, uc), _mm256_sub_pd(uc, un)), idy2);
        const __m256d grad = _mm256_mul_pd(_mm256_sub_pd(up, un), i2dy);
        const __m256d op = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(r.c + i), lap), _mm256_mul_pd(_mm256_loadu_pd(r.d + i), grad)),
            _mm256_mul_pd(m2, uc));
        const __m256d ump = _mm256_loadu_pd(r.um + i + 1);
        const __m256d umn = _mm256_loadu_pd(r.um + i - 1);
        const __m256d umc = _mm256_loadu_pd(r.um + i);
        const __m256d mixed = _mm256_mul_pd(_mm256_loadu_pd(r.beta + i), _mm256_sub_pd(ump, umn));
        const __m256d lead = _mm256_add_pd(_mm256_sub_pd(_mm256_add_pd(uc, uc), umc), mixed);
        _mm256_storeu_pd(r.out + i, _mm256_sub_pd(lead, _mm256_mul_pd(dt2, op)));
    }
    for (; i < r.n; ++i) {
        const double up = r.u[i + 1];
        const double uc = r.u[i];
        const double un = r.u[i - 1];
        const double lap = ((up - uc) - (uc - un)) * r.inv_dy2;
        const double grad = (up - un) * r.inv_2dy;
        const double op = (r.c[i] * lap + r.d[i] * grad) + r.m2 * uc;
        r.out[i] = ((uc + uc) - r.um[i]) + r.beta[i] * (r.um[i + 1] - r.um[i - 1]) - r.dt2 * op;
    }
}

constexpr Kernels kAvx2{Isa::Avx2, cell_integrals, add, field, source, max_abs_diff, oracle_rhs};

}  // namespace

const Kernels* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace kgc::simd

#else

namespace kgc::simd {
const Kernels* avx2_kernels() noexcept { return nullptr; }
}  // namespace kgc::simd

#endif
