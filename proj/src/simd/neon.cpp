#include "kgc/simd/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace kgc::simd {

namespace {

void cell_integrals(const double* a, const double* b, const double* w, double scale, double* out, std::size_t n) {
    const float64x2_t s = vdupq_n_f64(scale);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t sum =
            vaddq_f64(vaddq_f64(vld1q_f64(a + i + 1), vld1q_f64(a + i)), vaddq_f64(vld1q_f64(b + i + 1), vld1q_f64(b + i)));
        vst1q_f64(out + i, vmulq_f64(vmulq_f64(s, vld1q_f64(w + i)), sum));
    }
    for (; i < n; ++i) out[i] = scale * w[i] * ((a[i + 1] + a[i]) + (b[i + 1] + b[i]));
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void field(const double* g, double gu, const double* I, double* out, std::size_t n) {
    const float64x2_t vu = vdupq_n_f64(gu);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vsubq_f64(vld1q_f64(g + i), vu), vld1q_f64(I + i)));
    for (; i < n; ++i) out[i] = (g[i] - gu) - I[i];
}

void source(const double* g, double gu, const double* psi, double s, double* out, std::size_t n) {
    const float64x2_t vu = vdupq_n_f64(gu);
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vmulq_f64(vs, vaddq_f64(vsubq_f64(vld1q_f64(g + i), vu), vld1q_f64(psi + i))));
    }
    for (; i < n; ++i) out[i] = s * ((g[i] - gu) + psi[i]);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    float64x2_t m = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        // keep m where d is NaN or not larger
        m = vbslq_f64(vcgtq_f64(d, m), d, m);
    }
    double r = vgetq_lane_f64(m, 0);
    const double r1 = vgetq_lane_f64(m, 1);
    r = r1 > r ? r1 : r;
    for (; i < n; ++i) {
        const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
        r = d > r ? d : r;
    }
    return r;
}

void oracle_rhs(const OracleRowArgs& r) {
    const float64x2_t dt2 = vdupq_n_f64(r.dt2);
    const float64x2_t idy2 = vdupq_n_f64(r.inv_dy2);
    const float64x2_t i2dy = vdupq_n_f64(r.inv_2dy);
    const float64x2_t m2 = vdupq_n_f64(r.m2);
    std::size_t i = 0;
    for (; i + 2 <= r.n; i += 2) {
        const float64x2_t up = vld1q_f64(r.u + i + 1);
        const float64x2_t uc = vld1q_f64(r.u + i);
        const float64x2_t un = vld1q_f64(r.u + i - 1);
        const float64x2_t lap = vmulq_f64(vsubq_f64(vsubq_f64(up, uc), vsubq_f64(uc, un)), idy2);
        const float64x2_t grad = vmulq_f64(vsubq_f64(up, un), i2dy);
        const float64x2_t op = vaddq_f64(vaddq_f64(vmulq_f64(vld1q_f64(r.c + i), lap), vmulq_f64(vld1q_f64(r.d + i), grad)),
                                         vmulq_f64(m2, uc));
        const float64x2_t mixed = vmulq_f64(vld1q_f64(r.beta + i), vsubq_f64(vld1q_f64(r.um + i + 1), vld1q_f64(r.um + i - 1)));
        const float64x2_t lead = vaddq_f64(vsubq_f64(vaddq_f64(uc, uc), vld1q_f64(r.um + i)), mixed);
        vst1q_f64(r.out + i, vsubq_f64(lead, vmulq_f64(dt2, op)));
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

constexpr Kernels kNeon{Isa::Neon, cell_integrals, add, field, source, max_abs_diff, oracle_rhs};

}  // namespace

const Kernels* neon_kernels() noexcept { return &kNeon; }

}  // namespace kgc::simd

#else

namespace kgc::simd {
const Kernels* neon_kernels() noexcept { return nullptr; }
}  // namespace kgc::simd

#endif
