#include <gtest/gtest.h>

#include <cmath>

#include "glyphseg/backend/oracle.hpp"
#include "glyphseg/backend/scene.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "../support/fixtures.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

SyntheticScene single_char_scene(const std::string& categories, std::uint64_t seed = 3) {
    SceneSpec spec;
    spec.width = 160;
    spec.height = 120;
    spec.word_lengths = {1};
    spec.min_char_height = 48;
    spec.max_char_height = 56;
    spec.categories = categories;
    return generate_scene(seed, spec, {heldout_font("Arimo-Regular")}, "one");
}

SyntheticScene fixed_scene(std::vector<int> lengths, std::uint64_t seed = 9) {
    SceneSpec spec;
    spec.word_lengths = std::move(lengths);
    return generate_scene(seed, spec, heldout_fonts(), "fixed");
}

ImageRef ref(const SyntheticScene& s) { return {s.id, &s.image, s.image.width(), s.image.height()}; }

BitMask gt_in_box(const SyntheticScene& s, const BBox& box) { return crop(s.gt, box); }

}  // namespace

TEST(Scene, SameSeedSameBytes) {
    const auto a = generate_corpus(77, 3, SceneSpec{}, heldout_fonts());
    const auto b = generate_corpus(77, 3, SceneSpec{}, heldout_fonts());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].id, b[i].id);
        EXPECT_EQ(encode_png(a[i].image), encode_png(b[i].image));
        EXPECT_EQ(a[i].gt, b[i].gt);
        EXPECT_EQ(a[i].char_annotations(), b[i].char_annotations());
    }
    EXPECT_EQ(a[1].id, "scene_0001");
    EXPECT_NE(a[0].gt, a[1].gt);
}

TEST(Scene, CharMasksDisjointAndCoverGroundTruth) {
    for (const SyntheticScene& s : generate_corpus(5, 8, SceneSpec{}, heldout_fonts())) {
        BitMask seen(s.gt.width(), s.gt.height(), 0);
        for (const SceneChar& c : s.chars) {
            EXPECT_EQ(tight_bbox(c.mask), c.mask.bounds());
            BitMask placed(s.gt.width(), s.gt.height(), 0);
            paste_or(placed, c.mask, {c.box.x_min, c.box.y_min});
            EXPECT_EQ(count(mask_and(seen, placed)), 0);
            seen = mask_or(seen, placed);
        }
        EXPECT_EQ(seen, s.gt);
    }
}

TEST(Scene, WordLengthBookkeeping) {
    const SyntheticScene s = fixed_scene({2, 3, 4, 5, 6});
    EXPECT_EQ(s.words.size(), 5u);
    EXPECT_EQ(s.char_annotations().size(), 20u);
    for (std::size_t w = 0; w < s.words.size(); ++w) EXPECT_EQ(s.words[w].text.size(), w + 2);
}

TEST(Scene, CorpusRoundTrip) {
    TempDir dir;
    const auto scenes = generate_corpus(1, 2, SceneSpec{}, heldout_fonts());
    save_corpus(dir.path(), scenes);
    const auto back = load_corpus(dir.path());
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].image, scenes[i].image);
        EXPECT_EQ(back[i].gt, scenes[i].gt);
        EXPECT_EQ(back[i].char_annotations(), scenes[i].char_annotations());
        for (std::size_t c = 0; c < scenes[i].chars.size(); ++c) EXPECT_EQ(back[i].chars[c].mask, scenes[i].chars[c].mask);
    }
}

TEST(OracleSegment, UncorruptedIsGroundTruth) {
    const SyntheticScene s = fixed_scene({4});
    OracleBackend oracle({s});
    for (const SceneChar& c : s.chars) {
        const SegmentResponse r = oracle.segment(ref(s), {c.box, {}, {}});
        EXPECT_EQ(r.mask, c.mask);
        validate_response(r, c.box);
    }
    const BBox word = s.words[0].box;
    EXPECT_EQ(oracle.segment(ref(s), {word, {}, {}}).mask, gt_in_box(s, word));
}

TEST(OracleSegment, FillHolesRepairedByNegative) {
    const SyntheticScene s = single_char_scene("O");
    const SceneChar& o = s.chars.at(0);
    OracleConfig cfg;
    cfg.corruption.fill_holes = true;
    OracleBackend oracle({s}, cfg);
    const BitMask holes = hole_mask(o.mask);
    ASSERT_GT(count(holes), 0);

    const SegmentResponse filled = oracle.segment(ref(s), {o.box, {}, {}});
    EXPECT_EQ(filled.mask, mask_or(o.mask, holes));

    const Point inside = connected_components(holes, Connectivity::Four).items[0].first;
    const Point neg{o.box.x_min + inside.x, o.box.y_min + inside.y};
    EXPECT_EQ(oracle.segment(ref(s), {o.box, {}, {neg}}).mask, o.mask);
}

TEST(OracleSegment, TruncateRepairedByPositive) {
    const SyntheticScene s = single_char_scene("I");
    const SceneChar& c = s.chars.at(0);
    ASSERT_GT(c.box.height(), c.box.width());
    OracleConfig cfg;
    cfg.corruption.truncate = true;
    OracleBackend oracle({s}, cfg);

    const SegmentResponse cut = oracle.segment(ref(s), {c.box, {}, {}});
    const int h = c.box.height();
    const int dropped = static_cast<int>(std::floor(0.4 * h + 1e-9));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < c.box.width(); ++x) {
            EXPECT_EQ(cut.mask.at(x, y), y < h - dropped ? c.mask.at(x, y) : 0) << x << "," << y;
        }
    }
    Point pos{};
    for (int x = 0; x < c.box.width(); ++x) {
        if (c.mask.at(x, h - 1)) pos = {c.box.x_min + x, c.box.y_max - 1};
    }
    EXPECT_EQ(oracle.segment(ref(s), {c.box, {pos}, {}}).mask, c.mask);
}

TEST(OracleSegment, LogitsSignMatchesMask) {
    const SyntheticScene s = fixed_scene({3});
    OracleConfig cfg;
    cfg.corruption = {true, true, 0.4, true};
    OracleBackend oracle({s}, cfg);
    const SegmentResponse r = oracle.segment(ref(s), {s.words[0].box, {}, {}});
    validate_response(r, s.words[0].box);
    for (std::size_t i = 0; i < r.mask.size(); ++i) EXPECT_EQ(r.mask[i] != 0, r.logits[i] > 0.0f);
}

TEST(OracleDetect, GroundTruthAndConfiguredMerge) {
    const SyntheticScene s = fixed_scene({5});
    const BBox word = s.words[0].box;
    {
        OracleBackend oracle({s});
        const auto boxes = oracle.detect_chars(ref(s), word);
        ASSERT_EQ(boxes.size(), 5u);
        for (int i = 0; i < 5; ++i) EXPECT_EQ(boxes[i].bbox, s.chars[i].box);
    }
    OracleConfig cfg;
    cfg.merges[{s.id, 0}] = {{2, 3}};
    OracleBackend oracle({s}, cfg);
    const auto boxes = oracle.detect_chars(ref(s), word);
    ASSERT_EQ(boxes.size(), 4u);
    EXPECT_EQ(boxes[2].bbox, unite(s.chars[2].box, s.chars[3].box));
    EXPECT_EQ(boxes[3].bbox, s.chars[4].box);

    OracleConfig bad;
    bad.merges[{s.id, 0}] = {{1, 3}};
    EXPECT_THROW(OracleBackend({s}, bad).detect_chars(ref(s), word), Error);
}

TEST(OracleDetect, MergeRateIsSeeded) {
    const auto scenes = generate_corpus(40, 5, SceneSpec{}, heldout_fonts());
    OracleConfig cfg;
    cfg.merge_rate = 0.3;
    cfg.seed = 8;
    OracleBackend a(scenes, cfg), b(scenes, cfg);
    int merged = 0, pairs = 0;
    for (const auto& s : scenes) {
        for (std::size_t w = 0; w < s.words.size(); ++w) {
            EXPECT_EQ(a.merged_pairs(s.id, int(w)), b.merged_pairs(s.id, int(w)));
            merged += static_cast<int>(a.merged_pairs(s.id, int(w)).size());
            pairs += static_cast<int>(s.words[w].text.size()) - 1;
        }
    }
    EXPECT_GT(merged, 0);
    EXPECT_LT(merged, pairs);
}

TEST(OracleRecognize, Crops) {
    const SyntheticScene s = fixed_scene({5});
    OracleBackend oracle({s});
    const RecognitionResult one = oracle.recognize(ref(s), s.chars[1].box);
    EXPECT_EQ(one.text, std::string(1, s.chars[1].category));
    EXPECT_EQ(one.confidences, std::vector<double>{1.0});
    const RecognitionResult two = oracle.recognize(ref(s), unite(s.chars[2].box, s.chars[3].box));
    EXPECT_EQ(two.text, s.words[0].text.substr(2, 2));

    OracleConfig cfg;
    cfg.empty_rate = 1.0;
    OracleBackend empty({s}, cfg);
    EXPECT_TRUE(empty.recognize(ref(s), s.chars[1].box).text.empty());

    OracleConfig dim;
    dim.confidence_scale = 0.25;
    EXPECT_EQ(OracleBackend({s}, dim).recognize(ref(s), s.chars[0].box).confidences, std::vector<double>{0.25});
}

TEST(OracleBackend, UnknownImage) {
    OracleBackend oracle({fixed_scene({2})});
    EXPECT_THROW(oracle.segment({"nope", nullptr, 10, 10}, {{0, 0, 5, 5}, {}, {}}), Error);
}
