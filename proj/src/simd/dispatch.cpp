#include <cstdlib>
#include <string>
#include <vector>

#include "mvfp/simd/kernels.hpp"

namespace mvfp::simd {

#if defined(MVFP_BUILD_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(MVFP_BUILD_AVX512)
const KernelTable& avx512_kernels();
#endif

namespace {

std::vector<const KernelTable*> detect() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
#if defined(MVFP_BUILD_AVX2)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) out.push_back(&avx2_kernels());
#endif
#if defined(MVFP_BUILD_AVX512)
    if (__builtin_cpu_supports("avx512f")) out.push_back(&avx512_kernels());
#endif
    return out;
}

const std::vector<const KernelTable*>& tables() {
    static const std::vector<const KernelTable*> t = detect();
    return t;
}

const KernelTable* choose() {
    const auto& t = tables();
    if (const char* want = std::getenv("MVFP_SIMD")) {
        for (const KernelTable* k : t)
            if (std::string(k->name) == want) return k;
    }
    return t.back();
}

}  // namespace

std::span<const KernelTable* const> available_kernels() {
    const auto& t = tables();
    return {t.data(), t.size()};
}

const KernelTable& active() {
    static const KernelTable* k = choose();
    return *k;
}

std::string_view active_name() { return active().name; }

}  // namespace mvfp::simd
