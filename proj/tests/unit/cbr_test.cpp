#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphseg/backend/oracle.hpp"
#include "glyphseg/backend/scene.hpp"
#include "glyphseg/cbr/cbr.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

class FixedDetector : public CharDetector {
public:
    explicit FixedDetector(std::vector<DetectedBox> boxes) : boxes_(std::move(boxes)) {}
    std::vector<DetectedBox> detect_chars(const ImageRef&, const BBox&) override { return boxes_; }

private:
    std::vector<DetectedBox> boxes_;
};

// Flat positive logits: nothing for the watershed to split on.
class FlatSegmenter : public Segmenter {
public:
    SegmentResponse segment(const ImageRef&, const SegmentRequest& r) override {
        return {BitMask(r.box.width(), r.box.height(), 1), ScoreMap(r.box.width(), r.box.height(), 1.0f), 1.0};
    }
};

SyntheticScene word_scene(const std::vector<std::string>& words, std::uint64_t seed = 12) {
    SceneSpec spec;
    spec.word_texts = words;
    spec.min_char_height = 40;
    spec.max_char_height = 48;
    return generate_scene(seed, spec, {heldout_font("Arimo-Regular")}, "w");
}

ImageRef ref(const SyntheticScene& s) { return {s.id, &s.image, s.image.width(), s.image.height()}; }

std::vector<DetectedBox> detected(std::initializer_list<BBox> boxes) {
    std::vector<DetectedBox> out;
    for (const BBox& b : boxes) out.push_back({b, 1.0});
    return out;
}

double angle_deg(Vec2 v) { return std::atan2(v.y, v.x) * 180.0 / M_PI; }

}  // namespace

TEST(ReadingAxis, BoxesAndRotation) {
    EXPECT_EQ(reading_axis(quad_from_box({0, 0, 100, 20})).direction, (Vec2{1, 0}));
    EXPECT_EQ(reading_axis(quad_from_box({0, 0, 20, 100})).direction, (Vec2{0, 1}));
    const double a = 30.0 * M_PI / 180.0;
    const Vec2 u{std::cos(a), std::sin(a)}, v{-std::sin(a), std::cos(a)};
    const Vec2 o{50, 50};
    const Quad q = {o, o + u * 120.0, o + u * 120.0 + v * 30.0, o + v * 30.0};
    const ReadingAxis axis = reading_axis(q);
    EXPECT_NEAR(angle_deg(axis.direction), 30.0, 1.0);
    EXPECT_NEAR(axis.project(o), 0.0, 1e-9);
    EXPECT_NEAR(axis.project(o + u * 60.0), 0.5, 1e-9);
    EXPECT_NEAR(axis.project(o + u * 500.0), 1.0, 1e-9);
}

TEST(Assignment, MatchesBruteForce) {
    Rng rng(23);
    for (int round = 0; round < 300; ++round) {
        const int rows = static_cast<int>(rng.uniform_int(1, 6));
        const int cols = static_cast<int>(rng.uniform_int(rows, 6));
        const auto cost = random_costs(rng, rows, cols);
        const Matching m = solve_assignment(cost);
        ASSERT_EQ(m.column_of_row.size(), static_cast<std::size_t>(rows));
        std::vector<int> used = m.column_of_row;
        std::sort(used.begin(), used.end());
        EXPECT_EQ(std::adjacent_find(used.begin(), used.end()), used.end());
        EXPECT_NEAR(m.total, row_sum(cost, m.column_of_row), 1e-9);
        EXPECT_NEAR(m.total, brute_assignment(cost), 1e-9);
    }
    EXPECT_THROW(solve_assignment({{1, 2}, {3}}), Error);
    EXPECT_THROW(solve_assignment({{1}, {2}}), Error);
}

TEST(Assignment, OrderOnlyIsIdentityUnderShuffle) {
    const std::vector<BBox> boxes = {{0, 0, 10, 20}, {12, 0, 22, 20}, {24, 0, 34, 20}, {36, 0, 46, 20}};
    const ReadingAxis axis = reading_axis(quad_from_box({0, 0, 46, 20}));
    const auto in_order = assign_categories(boxes, "ab cd", {}, {}, axis);
    ASSERT_EQ(in_order.size(), 4u);
    for (int j = 0; j < 4; ++j) {
        EXPECT_EQ(in_order[j].char_index, j);
        EXPECT_EQ(in_order[j].box, boxes[j]);
        EXPECT_EQ(in_order[j].category, "abcd"[j]);
    }
    std::vector<BBox> shuffled = {boxes[2], boxes[0], boxes[3], boxes[1]};
    const auto again = assign_categories(shuffled, "abcd", {}, {}, axis);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(again[j].box, boxes[j]);
}

TEST(Assignment, ConfidentReadingOverridesPosition) {
    // Two nearly coincident boxes: the recognizer decides which is 'x'.
    const std::vector<BBox> boxes = {{0, 0, 10, 10}, {1, 0, 11, 10}};
    const ReadingAxis axis = reading_axis(quad_from_box({0, 0, 11, 10}));
    const std::vector<RecognitionResult> read = {{"y", {1.0}}, {"x", {1.0}}};
    const auto a = assign_categories(boxes, "xy", read, {0.1, 1.0}, axis);
    EXPECT_EQ(a[0].box, boxes[1]);
    EXPECT_EQ(a[1].box, boxes[0]);
}

TEST(DetectMerges, Examples) {
    const auto five = detected({{0, 0, 10, 20}, {10, 0, 20, 20}, {20, 0, 30, 20}, {30, 0, 40, 20}, {40, 0, 50, 20}});
    const auto singles = detect_merges(five, "Movie", {});
    ASSERT_EQ(singles.size(), 5u);
    for (const auto& s : singles) EXPECT_FALSE(s.merged());

    const auto four = detected({{0, 0, 14, 20}, {14, 0, 24, 20}, {24, 0, 40, 20}, {40, 0, 50, 20}});
    const std::vector<RecognitionResult> read = {{"M", {0.9}}, {"o", {0.9}}, {"vi", {0.9, 0.8}}, {"e", {0.9}}};
    const auto segs = detect_merges(four, "Movie", read);
    ASSERT_EQ(segs.size(), 4u);
    EXPECT_EQ(segs[2].text, "vi");
    EXPECT_EQ(segs[2].bbox, four[2].bbox);
    EXPECT_EQ(segs[0].text + segs[1].text + segs[3].text, "Moe");

    const auto two = detected({{0, 0, 10, 20}, {10, 0, 20, 20}});
    const std::vector<RecognitionResult> blank = {{"", {}}, {"", {}}};
    const auto ab = detect_merges(two, "ab", blank);
    EXPECT_EQ(ab[0].text, "a");
    EXPECT_EQ(ab[1].text, "b");

    // Width decides who absorbs the leftovers.
    const auto wide = detect_merges(detected({{0, 0, 30, 20}, {30, 0, 40, 20}}), "abcd", blank);
    EXPECT_EQ(wide[0].text, "abc");
    EXPECT_EQ(wide[1].text, "d");

    try {
        detect_merges(five, "abc", {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AlignmentFailed);
    }
}

TEST(SplitMerged, FlatLogitsFallBackToSlices) {
    FlatSegmenter flat;
    const BBox box{0, 0, 20, 10};
    const ReadingAxis axis = reading_axis(quad_from_box(box));
    bool fallback = false;
    const auto parts = split_merged({"x", nullptr, 100, 100}, box, 2, flat, axis, &fallback);
    EXPECT_TRUE(fallback);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0], (BBox{0, 0, 10, 10}));
    EXPECT_EQ(parts[1], (BBox{10, 0, 20, 10}));
    EXPECT_EQ(proportional_split({0, 0, 10, 30}, 3, reading_axis(quad_from_box({0, 0, 10, 30}))),
              (std::vector<BBox>{{0, 0, 10, 10}, {0, 10, 10, 20}, {0, 20, 10, 30}}));
}

TEST(SplitMerged, OracleMergedPairsSeparate) {
    const SyntheticScene s = word_scene({"Movie", "HAND"});
    OracleBackend oracle({s});
    const ReadingAxis axis = reading_axis(quad_from_box(s.words[0].box));
    auto check = [&](int first, int k) {
        BBox merged = s.chars[first].box;
        for (int i = 1; i < k; ++i) merged = unite(merged, s.chars[first + i].box);
        bool fallback = true;
        const auto parts = split_merged(ref(s), merged, k, oracle, axis, &fallback);
        EXPECT_FALSE(fallback);
        ASSERT_EQ(parts.size(), static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            const Vec2 c = s.chars[first + i].box.center();
            EXPECT_TRUE(parts[i].contains(Point{int(c.x), int(c.y)})) << "char " << first + i;
        }
    };
    check(2, 2);  // "vi"
    check(0, 3);  // "Mov"
    check(6, 2);  // "AN"
}

TEST(RefineWord, ExamplesAgainstGroundTruth) {
    const SyntheticScene s = word_scene({"HI", "Q", "Movie"});
    ASSERT_EQ(s.words.size(), 3u);
    OracleConfig cfg;
    cfg.merges[{s.id, 2}] = {{2, 3}};
    OracleBackend oracle({s}, cfg);
    const CbrBackends backends{oracle, &oracle, oracle};
    int first = 0;
    for (int w = 0; w < 3; ++w) {
        const RefinedWord r = refine_word(ref(s), {quad_from_box(s.words[w].box), s.words[w].text}, w, backends);
        SCOPED_TRACE(s.words[w].text);
        ASSERT_EQ(r.chars.size(), s.words[w].text.size());
        for (std::size_t j = 0; j < r.chars.size(); ++j) {
            const SceneChar& gt = s.chars[first + j];
            EXPECT_EQ(r.chars[j].category, gt.category);
            EXPECT_EQ(r.chars[j].char_index, static_cast<int>(j));
            EXPECT_EQ(r.chars[j].word_index, w);
            EXPECT_GE(iou(r.chars[j].bbox, gt.box), 0.7) << j;
        }
        first += static_cast<int>(s.words[w].text.size());
    }
}

TEST(RefineWord, NoDetectionsUsesProportionalSplit) {
    const SyntheticScene s = word_scene({"abc"});
    FixedDetector none({});
    FlatSegmenter flat;
    const RefinedWord r = refine_word(ref(s), {quad_from_box(s.words[0].box), "a bc"}, 0, {none, nullptr, flat});
    EXPECT_TRUE(r.fallback_used);
    ASSERT_EQ(r.chars.size(), 3u);
    EXPECT_EQ(r.chars[1].category, 'b');
    EXPECT_THROW(refine_word(ref(s), {quad_from_box({0, 0, 2, 2}), "abc"}, 0, {none, nullptr, flat}), Error);
}

TEST(RefineWord, Deterministic) {
    const SyntheticScene s = word_scene({"Movie", "glyph"}, 30);
    OracleConfig cfg;
    cfg.merge_rate = 0.5;
    cfg.seed = 3;
    OracleBackend oracle({s}, cfg);
    for (int w = 0; w < 2; ++w) {
        const WordAnnotation word{quad_from_box(s.words[w].box), s.words[w].text};
        const RefinedWord a = refine_word(ref(s), word, w, {oracle, &oracle, oracle});
        const RefinedWord b = refine_word(ref(s), word, w, {oracle, &oracle, oracle});
        EXPECT_EQ(a.chars, b.chars);
    }
}
