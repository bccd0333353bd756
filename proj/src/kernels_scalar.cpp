#include "qconv/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qconv::kern {
namespace {

double max_abs_scalar(const double* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

MinMax min_max_scalar(const double* a, std::size_t n) {
    if (n == 0) return {0.0, 0.0};
    double lo = a[0], hi = a[0];
    for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, a[i]);
        hi = std::max(hi, a[i]);
    }
    return {lo, hi};
}

// Blocked-4 accumulation; the SIMD variants reproduce this schedule exactly.
double dot_scalar(const double* a, const double* b, std::size_t n) {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        c0 += a[i] * b[i];
        c1 += a[i + 1] * b[i + 1];
        c2 += a[i + 2] * b[i + 2];
        c3 += a[i + 3] * b[i + 3];
    }
    double total = (c0 + c1) + (c2 + c3);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        c0 += std::fabs(a[i] - b[i]);
        c1 += std::fabs(a[i + 1] - b[i + 1]);
        c2 += std::fabs(a[i + 2] - b[i + 2]);
        c3 += std::fabs(a[i + 3] - b[i + 3]);
    }
    double total = (c0 + c1) + (c2 + c3);
    for (; i < n; ++i) total += std::fabs(a[i] - b[i]);
    return total;
}

void ripple_blend_scalar(double* q, double* mass, const double* f,
                         std::size_t n, double c0, double target) {
    for (std::size_t i = 0; i < n; ++i) {
        double alpha = std::min(c0 / (mass[i] + 1.0), 1.0);
        double w = f[i] * alpha;
        q[i] = (1.0 - w) * q[i] + w * target;
        mass[i] += f[i];
    }
}

const Ops kScalar = {
    "scalar",        max_abs_scalar, max_abs_diff_scalar, min_max_scalar,
    dot_scalar,      sum_abs_diff_scalar,
    ripple_blend_scalar,
};

} // namespace

const Ops& scalar_ops() { return kScalar; }

} // namespace qconv::kern
