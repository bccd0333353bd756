// NEON (aarch64) variants of the kernels in kernels_scalar.cpp. Two lanes per
// vector; the same blocked-4 accumulation schedule is kept by carrying two
// vector accumulators, so dot/sum results stay bit-identical to the scalar
// reference. No FMA instructions are used.

#include "qconv/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

namespace qconv::kern {
namespace {

double max_abs_neon(const double* a, std::size_t n) {
    float64x2_t vm = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vm = vmaxq_f64(vm, vabsq_f64(vld1q_f64(a + i)));
    }
    double m = std::max(vgetq_lane_f64(vm, 0), vgetq_lane_f64(vm, 1));
    for (; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    return std::max(m, 0.0);
}

double max_abs_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t vm = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        vm = vmaxq_f64(vm, vabsq_f64(d));
    }
    double m = std::max(vgetq_lane_f64(vm, 0), vgetq_lane_f64(vm, 1));
    for (; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return std::max(m, 0.0);
}

MinMax min_max_neon(const double* a, std::size_t n) {
    if (n == 0) return {0.0, 0.0};
    double lo = a[0], hi = a[0];
    std::size_t i = 0;
    if (n >= 2) {
        float64x2_t vlo = vld1q_f64(a);
        float64x2_t vhi = vlo;
        for (i = 2; i + 2 <= n; i += 2) {
            float64x2_t v = vld1q_f64(a + i);
            vlo = vminq_f64(vlo, v);
            vhi = vmaxq_f64(vhi, v);
        }
        lo = std::min(vgetq_lane_f64(vlo, 0), vgetq_lane_f64(vlo, 1));
        hi = std::max(vgetq_lane_f64(vhi, 0), vgetq_lane_f64(vhi, 1));
    } else {
        i = 1;
    }
    for (; i < n; ++i) {
        lo = std::min(lo, a[i]);
        hi = std::max(hi, a[i]);
    }
    return {lo, hi};
}

// Two 2-lane accumulators emulate the scalar blocked-4 schedule: acc01 holds
// partial sums for i%4 in {0,1}, acc23 for {2,3}.
double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double total = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
                   (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double sum_abs_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc01 = vaddq_f64(acc01, vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
        acc23 = vaddq_f64(acc23, vabsq_f64(vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2))));
    }
    double total = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
                   (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
    for (; i < n; ++i) total += std::fabs(a[i] - b[i]);
    return total;
}

void ripple_blend_neon(double* q, double* mass, const double* f,
                       std::size_t n, double c0, double target) {
    const float64x2_t vone = vdupq_n_f64(1.0);
    const float64x2_t vc0 = vdupq_n_f64(c0);
    const float64x2_t vtarget = vdupq_n_f64(target);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t m = vld1q_f64(mass + i);
        float64x2_t fw = vld1q_f64(f + i);
        float64x2_t alpha = vdivq_f64(vc0, vaddq_f64(m, vone));
        alpha = vminq_f64(alpha, vone);
        float64x2_t w = vmulq_f64(fw, alpha);
        float64x2_t qv = vld1q_f64(q + i);
        float64x2_t keep = vmulq_f64(vsubq_f64(vone, w), qv);
        float64x2_t pull = vmulq_f64(w, vtarget);
        vst1q_f64(q + i, vaddq_f64(keep, pull));
        vst1q_f64(mass + i, vaddq_f64(m, fw));
    }
    for (; i < n; ++i) {
        double alpha = std::min(c0 / (mass[i] + 1.0), 1.0);
        double w = f[i] * alpha;
        q[i] = (1.0 - w) * q[i] + w * target;
        mass[i] += f[i];
    }
}

const Ops kNeon = {
    "neon",     max_abs_neon, max_abs_diff_neon, min_max_neon,
    dot_neon,   sum_abs_diff_neon,
    ripple_blend_neon,
};

} // namespace

const Ops& neon_ops() { return kNeon; }

} // namespace qconv::kern

#endif // aarch64
