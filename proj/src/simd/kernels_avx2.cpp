// Built with -mavx2 -mpopcnt; only reached after a runtime CPU check.
#include "glyphseg/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

#include <bit>

namespace glyphseg::simd {
namespace {

inline std::uint32_t nonzero_bits(__m256i v) {
    const __m256i zero = _mm256_setzero_si256();
    return ~static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
}

MaskCounts tally_avx2(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n) {
    MaskCounts c;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const std::uint32_t p = nonzero_bits(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(pred + i)));
        const std::uint32_t g = nonzero_bits(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(gt + i)));
        c.tp += std::popcount(p & g);
        c.fp += std::popcount(p & ~g);
        c.fn += std::popcount(~p & g);
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

void accumulate_avx2(std::uint16_t* counts, const std::uint8_t* mask, std::size_t n) {
    const __m128i zero = _mm_setzero_si128();
    const __m128i one = _mm_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const __m128i m = _mm_loadu_si128(reinterpret_cast<const __m128i*>(mask + i));
        const __m128i bit = _mm_andnot_si128(_mm_cmpeq_epi8(m, zero), one);
        const __m256i inc = _mm256_cvtepu8_epi16(bit);
        __m256i* dst = reinterpret_cast<__m256i*>(counts + i);
        _mm256_storeu_si256(dst, _mm256_add_epi16(_mm256_loadu_si256(dst), inc));
    }
    for (; i < n; ++i) counts[i] += mask[i] != 0;
}

inline __m256i ge_u16(__m256i v, __m256i bound) {
    return _mm256_cmpeq_epi16(_mm256_max_epu16(v, bound), v);
}

void threshold_avx2(const std::uint16_t* counts, std::uint16_t min_count, std::uint8_t* out,
                    std::size_t n) {
    const __m256i bound = _mm256_set1_epi16(static_cast<short>(min_count));
    const __m256i one = _mm256_set1_epi16(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i a = _mm256_and_si256(
            ge_u16(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(counts + i)), bound), one);
        const __m256i b = _mm256_and_si256(
            ge_u16(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(counts + i + 16)), bound), one);
        // packus interleaves 128-bit lanes; restore order with a qword permute.
        const __m256i packed = _mm256_permute4x64_epi64(_mm256_packus_epi16(a, b), 0xD8);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), packed);
    }
    for (; i < n; ++i) out[i] = counts[i] >= min_count;
}

void merge_or_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    const __m256i zero = _mm256_setzero_si256();
    const __m256i one = _mm256_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i* d = reinterpret_cast<__m256i*>(dst + i);
        const __m256i v = _mm256_or_si256(_mm256_loadu_si256(d),
                                          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i)));
        _mm256_storeu_si256(d, _mm256_andnot_si256(_mm256_cmpeq_epi8(v, zero), one));
    }
    for (; i < n; ++i) dst[i] = (dst[i] | src[i]) != 0;
}

}  // namespace

const KernelTable* avx2_kernels() {
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
    static const KernelTable table{"avx2", tally_avx2, accumulate_avx2, threshold_avx2, merge_or_avx2};
    return supported ? &table : nullptr;
}

}  // namespace glyphseg::simd

#else

namespace glyphseg::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace glyphseg::simd

#endif
