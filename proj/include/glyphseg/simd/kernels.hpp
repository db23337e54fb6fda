#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace glyphseg::simd {

struct MaskCounts {
    std::uint64_t tp = 0;  // pred & gt
    std::uint64_t fp = 0;  // pred & !gt
    std::uint64_t fn = 0;  // !pred & gt

    friend bool operator==(const MaskCounts&, const MaskCounts&) = default;
};

// Byte masks: any nonzero byte is foreground.
struct KernelTable {
    std::string_view name;
    MaskCounts (*tally)(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n);
    // counts[i] += (mask[i] != 0)
    void (*accumulate)(std::uint16_t* counts, const std::uint8_t* mask, std::size_t n);
    // out[i] = counts[i] >= min_count
    void (*threshold)(const std::uint16_t* counts, std::uint16_t min_count, std::uint8_t* out,
                      std::size_t n);
    // dst[i] = (dst[i] | src[i]) != 0
    void (*merge_or)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
};

const KernelTable& scalar_kernels();

/// AVX2 table, or nullptr when not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// NEON table, or nullptr off aarch64.
const KernelTable* neon_kernels();

/// Best table for this CPU, chosen once. Setting GLYPHSEG_FORCE_SCALAR=1 in
/// the environment pins the scalar reference.
const KernelTable& active_kernels();

}  // namespace glyphseg::simd
