#include <cstdlib>
#include <string_view>

#include "glyphseg/simd/kernels.hpp"

namespace glyphseg::simd {

const KernelTable& active_kernels() {
    static const KernelTable& table = [] () -> const KernelTable& {
        if (const char* force = std::getenv("GLYPHSEG_FORCE_SCALAR");
            force != nullptr && std::string_view(force) != "0") {
            return scalar_kernels();
        }
        if (const KernelTable* t = avx2_kernels()) return *t;
        if (const KernelTable* t = neon_kernels()) return *t;
        return scalar_kernels();
    }();
    return table;
}

}  // namespace glyphseg::simd
