#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kdg/simd.hpp"

namespace kdg::simd {

#ifdef KDG_WITH_AVX2
const KernelTable* avx2_kernels_compiled();
#endif

const KernelTable* avx2_kernels() {
#if defined(KDG_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? avx2_kernels_compiled() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable* initial_table() {
    const char* env = std::getenv("KDG_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

bool set_backend(Backend b) {
    const KernelTable* t = b == Backend::Scalar ? &scalar_kernels() : avx2_kernels();
    if (t == nullptr) return false;
    active().store(t, std::memory_order_release);
    return true;
}

Backend active_backend() { return kernels().backend; }

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace kdg::simd
