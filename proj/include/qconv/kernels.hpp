#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops used by the solver, the learners and the ripple
// update. Every kernel has a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected once at startup.
//
// All variants are bit-identical to the scalar reference, by construction:
//   - max/min reductions are exactly associative on finite doubles,
//   - elementwise kernels apply the same per-lane expression,
//   - dot/sum_abs_diff use a fixed blocked-4-accumulator schedule that the
//     scalar reference implements too.
// The project is compiled with -ffp-contract=off so the compiler cannot fuse
// the scalar path into FMAs that the explicit SIMD code does not use.

namespace qconv::kern {

struct MinMax {
    double lo;
    double hi;
};

struct Ops {
    const char* name;

    // max_i |a[i]|; 0 for n == 0.
    double (*max_abs)(const double* a, std::size_t n);
    // max_i |a[i] - b[i]|; 0 for n == 0.
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
    // elementwise min and max; {0,0} for n == 0.
    MinMax (*min_max)(const double* a, std::size_t n);
    // sum_i a[i]*b[i], blocked-4 accumulation order.
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i |a[i] - b[i]|, blocked-4 accumulation order.
    double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
    // Ripple-weighted Q update over one action plane:
    //   alpha_i = min(1, c0 / (mass[i] + 1))
    //   w_i     = f[i] * alpha_i
    //   q[i]    = (1 - w_i) * q[i] + w_i * target
    //   mass[i] += f[i]
    void (*ripple_blend)(double* q, double* mass, const double* f,
                         std::size_t n, double c0, double target);
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported();
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Best available variant for this machine. Honors QCONV_SIMD=scalar|avx2|neon
// (evaluated once) for forcing a path.
const Ops& active_ops();

// All variants compiled into this binary (for equivalence tests).
std::vector<const Ops*> compiled_ops();

} // namespace qconv::kern
