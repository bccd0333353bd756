// AVX2 variants of the kernels in kernels_scalar.cpp. This translation unit is
// compiled with -mavx2; callers must gate on avx2_supported().
//
// No FMA is used anywhere: every lane does mul-then-add exactly like the
// scalar reference, so results are bit-identical across paths.

#include "qconv/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace qconv::kern {
namespace {

inline double hmax(__m256d v) {
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return std::max(std::max(t[0], t[1]), std::max(t[2], t[3]));
}

inline double hmin(__m256d v) {
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return std::min(std::min(t[0], t[1]), std::min(t[2], t[3]));
}

inline __m256d abs_pd(__m256d v) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign_mask, v);
}

double max_abs_avx2(const double* a, std::size_t n) {
    __m256d vm = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vm = _mm256_max_pd(vm, abs_pd(_mm256_loadu_pd(a + i)));
    }
    double m = hmax(vm);
    for (; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    return std::max(m, 0.0);
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d vm = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        vm = _mm256_max_pd(vm, abs_pd(d));
    }
    double m = hmax(vm);
    for (; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return std::max(m, 0.0);
}

MinMax min_max_avx2(const double* a, std::size_t n) {
    if (n == 0) return {0.0, 0.0};
    double lo = a[0], hi = a[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vlo = _mm256_loadu_pd(a);
        __m256d vhi = vlo;
        for (i = 4; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(a + i);
            vlo = _mm256_min_pd(vlo, v);
            vhi = _mm256_max_pd(vhi, v);
        }
        lo = hmin(vlo);
        hi = hmax(vhi);
    } else {
        i = 1;
    }
    for (; i < n; ++i) {
        lo = std::min(lo, a[i]);
        hi = std::max(hi, a[i]);
    }
    return {lo, hi};
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, prod);
    }
    alignas(32) double t[4];
    _mm256_store_pd(t, acc);
    // Same combine order as the scalar blocked-4 reference.
    double total = (t[0] + t[1]) + (t[2] + t[3]);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, abs_pd(d));
    }
    alignas(32) double t[4];
    _mm256_store_pd(t, acc);
    double total = (t[0] + t[1]) + (t[2] + t[3]);
    for (; i < n; ++i) total += std::fabs(a[i] - b[i]);
    return total;
}

void ripple_blend_avx2(double* q, double* mass, const double* f,
                       std::size_t n, double c0, double target) {
    const __m256d vone = _mm256_set1_pd(1.0);
    const __m256d vc0 = _mm256_set1_pd(c0);
    const __m256d vtarget = _mm256_set1_pd(target);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d m = _mm256_loadu_pd(mass + i);
        __m256d fw = _mm256_loadu_pd(f + i);
        __m256d alpha = _mm256_div_pd(vc0, _mm256_add_pd(m, vone));
        alpha = _mm256_min_pd(alpha, vone);
        __m256d w = _mm256_mul_pd(fw, alpha);
        __m256d qv = _mm256_loadu_pd(q + i);
        __m256d keep = _mm256_mul_pd(_mm256_sub_pd(vone, w), qv);
        __m256d pull = _mm256_mul_pd(w, vtarget);
        _mm256_storeu_pd(q + i, _mm256_add_pd(keep, pull));
        _mm256_storeu_pd(mass + i, _mm256_add_pd(m, fw));
    }
    for (; i < n; ++i) {
        double alpha = std::min(c0 / (mass[i] + 1.0), 1.0);
        double w = f[i] * alpha;
        q[i] = (1.0 - w) * q[i] + w * target;
        mass[i] += f[i];
    }
}

const Ops kAvx2 = {
    "avx2",     max_abs_avx2, max_abs_diff_avx2, min_max_avx2,
    dot_avx2,   sum_abs_diff_avx2,
    ripple_blend_avx2,
};

} // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

const Ops& avx2_ops() { return kAvx2; }

} // namespace qconv::kern

#endif // x86-64
