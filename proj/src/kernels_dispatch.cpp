#include "qconv/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qconv::kern {
namespace {

const Ops* select() {
    const char* force = std::getenv("QCONV_SIMD");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(force, "avx2") == 0 && avx2_supported()) return &avx2_ops();
#endif
#if defined(__aarch64__)
        if (std::strcmp(force, "neon") == 0) return &neon_ops();
#endif
        return &scalar_ops();
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return &avx2_ops();
#endif
#if defined(__aarch64__)
    return &neon_ops();
#endif
    return &scalar_ops();
}

} // namespace

const Ops& active_ops() {
    static const Ops* chosen = select();
    return *chosen;
}

std::vector<const Ops*> compiled_ops() {
    std::vector<const Ops*> all;
    all.push_back(&scalar_ops());
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) all.push_back(&avx2_ops());
#endif
#if defined(__aarch64__)
    all.push_back(&neon_ops());
#endif
    return all;
}

} // namespace qconv::kern
