#include "glyphseg/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace glyphseg::simd {
namespace {

MaskCounts tally_neon(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n) {
    MaskCounts c;
    std::size_t i = 0;
    const uint8x16_t one = vdupq_n_u8(1);
    for (; i + 16 <= n; i += 16) {
        const uint8x16_t p = vminq_u8(vld1q_u8(pred + i), one);
        const uint8x16_t g = vminq_u8(vld1q_u8(gt + i), one);
        c.tp += vaddvq_u8(vandq_u8(p, g));
        c.fp += vaddvq_u8(vbicq_u8(p, g));
        c.fn += vaddvq_u8(vbicq_u8(g, p));
    }
    for (; i < n; ++i) {
        const bool p = pred[i] != 0;
        const bool g = gt[i] != 0;
        c.tp += p && g;
        c.fp += p && !g;
        c.fn += !p && g;
    }
    return c;
}

void accumulate_neon(std::uint16_t* counts, const std::uint8_t* mask, std::size_t n) {
    std::size_t i = 0;
    const uint8x8_t one = vdup_n_u8(1);
    for (; i + 8 <= n; i += 8) {
        const uint8x8_t bit = vmin_u8(vld1_u8(mask + i), one);
        vst1q_u16(counts + i, vaddw_u8(vld1q_u16(counts + i), bit));
    }
    for (; i < n; ++i) counts[i] += mask[i] != 0;
}

void threshold_neon(const std::uint16_t* counts, std::uint16_t min_count, std::uint8_t* out,
                    std::size_t n) {
    std::size_t i = 0;
    const uint16x8_t bound = vdupq_n_u16(min_count);
    for (; i + 8 <= n; i += 8) {
        const uint16x8_t ge = vcgeq_u16(vld1q_u16(counts + i), bound);
        vst1_u8(out + i, vmovn_u16(vshrq_n_u16(ge, 15)));
    }
    for (; i < n; ++i) out[i] = counts[i] >= min_count;
}

void merge_or_neon(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    std::size_t i = 0;
    const uint8x16_t one = vdupq_n_u8(1);
    for (; i + 16 <= n; i += 16) {
        vst1q_u8(dst + i, vminq_u8(vorrq_u8(vld1q_u8(dst + i), vld1q_u8(src + i)), one));
    }
    for (; i < n; ++i) dst[i] = (dst[i] | src[i]) != 0;
}

}  // namespace

const KernelTable* neon_kernels() {
    static const KernelTable table{"neon", tally_neon, accumulate_neon, threshold_neon, merge_or_neon};
    return &table;
}

}  // namespace glyphseg::simd

#else

namespace glyphseg::simd {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace glyphseg::simd

#endif
