#include <gtest/gtest.h>

#include "glyphseg/raster/morphology.hpp"
#include "glyphseg/raster/watershed.hpp"
#include "glyphseg/simd/kernels.hpp"
#include "../support/oracles.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

BitMask ring(int size, int thickness) {
    BitMask m(size, size, 0);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const int edge = std::min({x, y, size - 1 - x, size - 1 - y});
            m.at(x, y) = edge < thickness;
        }
    }
    return m;
}

}  // namespace

TEST(BoxIoU, Examples) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 1.0 / 3.0);
}

TEST(BoxIoU, MatchesPixelCount) {
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        const BBox a = random_box(rng, 20), b = random_box(rng, 20);
        long inter = 0, uni = 0;
        for (int y = 0; y < 20; ++y) {
            for (int x = 0; x < 20; ++x) {
                const bool in_a = a.contains(Point{x, y}), in_b = b.contains(Point{x, y});
                inter += in_a && in_b;
                uni += in_a || in_b;
            }
        }
        const double v = iou(a, b);
        EXPECT_NEAR(v, double(inter) / double(uni), 1e-12);
        EXPECT_DOUBLE_EQ(v, iou(b, a));
        EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Components, Examples) {
    EXPECT_TRUE(connected_components(BitMask(8, 8, 0)).items.empty());
    BitMask diag(3, 3, 0);
    diag.at(0, 0) = diag.at(1, 1) = 1;
    EXPECT_EQ(connected_components(diag, Connectivity::Eight).items.size(), 1u);
    EXPECT_EQ(connected_components(diag, Connectivity::Four).items.size(), 2u);
}

TEST(Components, MatchesUnionFind) {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const int w = static_cast<int>(rng.uniform_int(1, 16)), h = static_cast<int>(rng.uniform_int(1, 16));
        const BitMask m = random_mask(rng, w, h, rng.uniform());
        for (bool eight : {true, false}) {
            const Components c = connected_components(m, eight ? Connectivity::Eight : Connectivity::Four);
            EXPECT_TRUE(same_partition(union_find_roots(m, eight), c.labels));
            std::int64_t total = 0;
            for (std::size_t k = 0; k < c.items.size(); ++k) {
                EXPECT_EQ(c.items[k].label, static_cast<int>(k) + 1);
                if (k > 0) EXPECT_GE(c.items[k - 1].area, c.items[k].area);
                total += c.items[k].area;
            }
            EXPECT_EQ(total, count(m));
        }
    }
}

TEST(Flood, RingInteriorIsHole) {
    const BitMask m = ring(10, 2);
    const BitMask flood = flood_from_border(m);
    EXPECT_FALSE(flood.at(5, 5));
    EXPECT_EQ(count(hole_mask(m)), 36);
    EXPECT_EQ(count(flood_from_border(BitMask(6, 4, 0))), 24);
}

TEST(Flood, MatchesBfsAndIsFixedPoint) {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const BitMask m = random_mask(rng, static_cast<int>(rng.uniform_int(1, 24)),
                                      static_cast<int>(rng.uniform_int(1, 24)), rng.uniform());
        const BitMask flood = flood_from_border(m);
        EXPECT_EQ(flood, bfs_border_flood(m));
        EXPECT_TRUE(mask_and(flood, m) == BitMask(m.width(), m.height(), 0));
        // Flooding the complement-of-flood mask reproduces the flood.
        EXPECT_EQ(flood_from_border(invert(flood)), flood);
    }
}

TEST(DistanceTransform, Examples) {
    BitMask one(5, 5, 0);
    one.at(2, 2) = 1;
    EXPECT_EQ(distance_transform(one).at(2, 2), 1.0f);
    EXPECT_EQ(distance_transform(one).at(0, 0), 0.0f);
    EXPECT_EQ(distance_transform(BitMask(5, 5, 1)).at(2, 2), 3.0f);
}

TEST(DistanceTransform, MatchesBruteForce) {
    Rng rng(9);
    for (int i = 0; i < 150; ++i) {
        const BitMask m = random_mask(rng, static_cast<int>(rng.uniform_int(1, 20)),
                                      static_cast<int>(rng.uniform_int(1, 20)), 0.3 + 0.7 * rng.uniform());
        EXPECT_EQ(distance_transform(m), brute_distance(m));
    }
}

TEST(Watershed, TwoBumpsSplit) {
    const ScoreMap s = bump_map(40, 20, {{10, 10, 1.0, 2.5}, {30, 10, 1.0, 2.5}});
    const LabelMap l = watershed_partition(s, BitMask(40, 20, 1), 2);
    EXPECT_NE(l.at(10, 10), l.at(30, 10));
}

TEST(Watershed, SingleRegionIsDomain) {
    Rng rng(1);
    const BitMask domain = random_mask(rng, 12, 9, 0.7);
    const LabelMap l = watershed_partition(bump_map(12, 9, {{6, 4, 1.0, 2.0}}), domain, 1);
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(l[i], domain[i] ? 1 : 0);
}

TEST(Watershed, UniformScoresLackPeaks) {
    try {
        watershed_partition(ScoreMap(20, 10, 1.0f), BitMask(20, 10, 1), 2);
        FAIL() << "expected InsufficientPeaks";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientPeaks);
    }
}

TEST(Watershed, MarkerRadius) {
    EXPECT_EQ(marker_nms_radius(20, 2), 5);
    EXPECT_EQ(marker_nms_radius(3, 4), 2);
    EXPECT_EQ(marker_nms_radius(21, 2), 6);
}

TEST(Watershed, PartitionInvariants) {
    Rng rng(21);
    for (int i = 0; i < 60; ++i) {
        const int w = static_cast<int>(rng.uniform_int(20, 60)), h = 16;
        const int k = static_cast<int>(rng.uniform_int(1, 3));
        std::vector<Bump> bumps;
        for (int j = 0; j < k; ++j) bumps.push_back({(j + 0.5) * w / k, 8, 1.0 + 0.3 * j, 1.5});
        const ScoreMap s = bump_map(w, h, bumps);
        const BitMask domain(w, h, 1);
        const LabelMap a = watershed_partition(s, domain, k);
        EXPECT_EQ(a, watershed_partition(s, domain, k));
        std::vector<int> sizes(k + 1, 0);
        for (std::size_t p = 0; p < a.size(); ++p) {
            ASSERT_GE(a[p], 1);
            ASSERT_LE(a[p], k);
            ++sizes[a[p]];
        }
        for (int l = 1; l <= k; ++l) EXPECT_GT(sizes[l], 0);
    }
}

TEST(Simd, KernelsAgreeWithScalar) {
    const simd::KernelTable& ref = simd::scalar_kernels();
    std::vector<const simd::KernelTable*> tables = {&simd::active_kernels()};
    if (simd::avx2_kernels()) tables.push_back(simd::avx2_kernels());
    if (simd::neon_kernels()) tables.push_back(simd::neon_kernels());
    Rng rng(17);
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(0, 300));
        std::vector<std::uint8_t> a(n), b(n);
        std::vector<std::uint16_t> counts(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.chance(0.5) ? static_cast<std::uint8_t>(rng.uniform_int(1, 255)) : 0;
            b[i] = rng.chance(0.5) ? 1 : 0;
            counts[i] = static_cast<std::uint16_t>(rng.uniform_int(0, 40));
        }
        const auto min_count = static_cast<std::uint16_t>(rng.uniform_int(0, 41));
        for (const simd::KernelTable* t : tables) {
            SCOPED_TRACE(std::string(t->name));
            EXPECT_EQ(t->tally(a.data(), b.data(), n), ref.tally(a.data(), b.data(), n));

            auto c1 = counts, c2 = counts;
            t->accumulate(c1.data(), a.data(), n);
            ref.accumulate(c2.data(), a.data(), n);
            EXPECT_EQ(c1, c2);

            std::vector<std::uint8_t> o1(n), o2(n);
            t->threshold(counts.data(), min_count, o1.data(), n);
            ref.threshold(counts.data(), min_count, o2.data(), n);
            EXPECT_EQ(o1, o2);

            auto d1 = b, d2 = b;
            t->merge_or(d1.data(), a.data(), n);
            ref.merge_or(d2.data(), a.data(), n);
            EXPECT_EQ(d1, d2);
        }
    }
}

TEST(RasterOps, CropAndPaste) {
    BitMask m(6, 6, 0);
    m.at(4, 4) = 1;
    const BitMask c = crop(m, {3, 3, 8, 8});
    EXPECT_EQ(c.width(), 5);
    EXPECT_EQ(c.at(1, 1), 1);
    EXPECT_EQ(c.at(4, 4), 0);
    BitMask dst(6, 6, 0);
    paste_or(dst, c, {3, 3});
    EXPECT_EQ(dst, m);
    EXPECT_EQ(tight_bbox(m), (BBox{4, 4, 5, 5}));
    EXPECT_TRUE(tight_bbox(BitMask(3, 3, 0)).empty());
}
