#include "bowenlab/kernels.hpp"

#include <cstdlib>

namespace bowenlab::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Ops& active_ops() {
    static const Ops* selected = [] {
        const char* force = std::getenv("BOWEN_LAB_FORCE_SCALAR");
        if (force && force[0] == '1') return &scalar_ops();
        if (avx2_available()) return &avx2_ops();
        return &scalar_ops();
    }();
    return *selected;
}

} // namespace bowenlab::kernels
