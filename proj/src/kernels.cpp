#include <cstdlib>
#include <cstring>

#include "rmp/kernels.hpp"

namespace rmp::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops& select(Kind kind) {
    if (kind == Kind::Scalar) return scalar_ops();
    if (kind == Kind::Avx2) return avx2_ops();
    static const Ops* auto_choice = [] {
        const char* env = std::getenv("RMP_KERNELS");
        if (env) {
            if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
            if (std::strcmp(env, "avx2") == 0 && avx2_available()) return &avx2_ops();
        }
        return avx2_available() ? &avx2_ops() : &scalar_ops();
    }();
    return *auto_choice;
}

}  // namespace rmp::kernels
