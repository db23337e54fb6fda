#include "glyphseg/simd/kernels.hpp"

namespace glyphseg::simd {
namespace {

MaskCounts tally_scalar(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n) {
    MaskCounts c;
    for (std::size_t i = 0; i < n; ++i) {
        const bool p = pred[i] != 0;
        const bool g = gt[i] != 0;
        c.tp += p && g;
        c.fp += p && !g;
        c.fn += !p && g;
    }
    return c;
}

void accumulate_scalar(std::uint16_t* counts, const std::uint8_t* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) counts[i] += mask[i] != 0;
}

void threshold_scalar(const std::uint16_t* counts, std::uint16_t min_count, std::uint8_t* out,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = counts[i] >= min_count;
}

void merge_or_scalar(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = (dst[i] | src[i]) != 0;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", tally_scalar, accumulate_scalar, threshold_scalar,
                                   merge_or_scalar};
    return table;
}

}  // namespace glyphseg::simd
