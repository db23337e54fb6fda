#include <gtest/gtest.h>

#include <json.hpp>

#include "glyphseg/error.hpp"
#include "glyphseg/eval/metrics.hpp"
#include "glyphseg/raster/image.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

PixelTally t(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn = 0) { return {tp, fp, fn, tn}; }

}  // namespace

TEST(Tally, Examples) {
    Rng rng(1);
    const BitMask gt = random_mask(rng, 9, 7, 0.4);
    const PixelTally same = tally(gt, gt);
    EXPECT_EQ(same.fp, 0u);
    EXPECT_EQ(same.fn, 0u);
    EXPECT_EQ(same.tp, std::uint64_t(count(gt)));
    const PixelTally empty = tally(BitMask(9, 7, 0), gt);
    EXPECT_EQ(empty.tp, 0u);
    EXPECT_EQ(empty.fn, std::uint64_t(count(gt)));
    EXPECT_EQ(code_of([] { tally(BitMask(3, 3, 0), BitMask(3, 4, 0)); }), ErrorCode::ShapeMismatch);
}

TEST(Tally, MatchesBruteForce) {
    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const int w = static_cast<int>(rng.uniform_int(1, 70)), h = static_cast<int>(rng.uniform_int(1, 20));
        const BitMask p = random_mask(rng, w, h, rng.uniform()), g = random_mask(rng, w, h, rng.uniform());
        const PixelTally a = tally(p, g);
        const BruteTally b = brute_tally(p, g);
        ASSERT_EQ(a, t(b.tp, b.fp, b.fn, b.tn));
        ASSERT_EQ(a.tp + a.fp + a.fn + a.tn, std::uint64_t(w) * std::uint64_t(h));
    }
}

TEST(Metrics, Examples) {
    const Metrics half = metrics(t(50, 25, 25));
    EXPECT_DOUBLE_EQ(half.fg_iou, 0.5);
    EXPECT_NEAR(half.precision, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(half.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(half.f_score, 2.0 / 3.0, 1e-12);

    const Metrics perfect = metrics(t(10, 0, 0, 5));
    EXPECT_EQ(perfect.fg_iou, 1.0);
    EXPECT_EQ(perfect.f_score, 1.0);

    const EvalReport two = make_report({{"a", t(1, 0, 1)}, {"b", t(3, 2, 0)}});
    EXPECT_DOUBLE_EQ(two.global.fg_iou, 4.0 / 7.0);
    EXPECT_EQ(two.total, t(4, 2, 1));
    EXPECT_DOUBLE_EQ(two.images[0].metrics.fg_iou, 0.5);
}

TEST(Metrics, DegenerateDenominators) {
    const Metrics both_empty = metrics(t(0, 0, 0, 100));
    EXPECT_EQ(both_empty.fg_iou, 1.0);
    EXPECT_EQ(both_empty.precision, 1.0);
    EXPECT_EQ(both_empty.recall, 1.0);
    EXPECT_EQ(both_empty.f_score, 1.0);

    const Metrics missed = metrics(t(0, 0, 5));  // nothing predicted, something there
    EXPECT_EQ(missed.fg_iou, 0.0);
    EXPECT_EQ(missed.precision, 0.0);
    EXPECT_EQ(missed.recall, 0.0);
    EXPECT_EQ(missed.f_score, 0.0);

    const Metrics phantom = metrics(t(0, 5, 0));  // predicted on empty ground truth
    EXPECT_EQ(phantom.precision, 0.0);
    EXPECT_EQ(phantom.recall, 0.0);
    EXPECT_EQ(code_of([] { make_report({}); }), ErrorCode::EmptyInput);
}

TEST(Metrics, FScoreIsIoUIdentity) {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const PixelTally x = t(static_cast<std::uint64_t>(rng.uniform_int(1, 10000)),
                               static_cast<std::uint64_t>(rng.uniform_int(0, 10000)),
                               static_cast<std::uint64_t>(rng.uniform_int(0, 10000)));
        const Metrics m = metrics(x);
        EXPECT_NEAR(m.f_score, 2.0 * m.fg_iou / (1.0 + m.fg_iou), 1e-12);
        EXPECT_LE(m.fg_iou, m.f_score + 1e-15);
    }
}

TEST(Metrics, TilingInvariance) {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const int w = static_cast<int>(rng.uniform_int(2, 60)), h = static_cast<int>(rng.uniform_int(2, 60));
        const BitMask p = random_mask(rng, w, h, rng.uniform()), g = random_mask(rng, w, h, rng.uniform());
        const int cx = static_cast<int>(rng.uniform_int(1, w - 1)), cy = static_cast<int>(rng.uniform_int(1, h - 1));
        std::vector<NamedTally> tiles;
        for (const BBox& b : {BBox{0, 0, cx, cy}, BBox{cx, 0, w, cy}, BBox{0, cy, cx, h}, BBox{cx, cy, w, h}}) {
            tiles.push_back({"tile", tally(crop(p, b), crop(g, b))});
        }
        const EvalReport whole = make_report({{"whole", tally(p, g)}});
        const EvalReport parts = make_report(tiles);
        EXPECT_EQ(parts.total, whole.total);
        EXPECT_EQ(parts.global.fg_iou, whole.global.fg_iou);
        EXPECT_EQ(parts.global.f_score, whole.global.f_score);
    }
}

TEST(EvaluateDirs, FixtureTalliesAndErrors) {
    TempDir pred, gt;
    Rng rng(17);
    PixelTally expected;
    for (const char* id : {"a", "b", "c"}) {
        const BitMask p = random_mask(rng, 20, 12, 0.5), g = random_mask(rng, 20, 12, 0.5);
        save_mask_png(pred.path() / (std::string(id) + ".png"), p);
        save_mask_png(gt.path() / (std::string(id) + ".png"), g);
        const BruteTally b = brute_tally(p, g);
        expected += t(b.tp, b.fp, b.fn, b.tn);
    }
    const EvalReport r = evaluate_dirs(pred.path(), gt.path());
    ASSERT_EQ(r.images.size(), 3u);
    EXPECT_EQ(r.images[1].id, "b");
    EXPECT_EQ(r.total, expected);

    const auto j = nlohmann::json::parse(report_json(r));
    EXPECT_EQ(j["tally"]["tp"].get<std::uint64_t>(), expected.tp);
    EXPECT_DOUBLE_EQ(j["fg_iou"].get<double>(), r.global.fg_iou);
    EXPECT_EQ(j["images"].size(), 3u);

    EXPECT_EQ(evaluate_dirs(gt.path(), gt.path()).global.fg_iou, 1.0);

    save_mask_png(gt.path() / "d.png", BitMask(20, 12, 0));
    try {
        evaluate_dirs(pred.path(), gt.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingPair);
        EXPECT_NE(std::string(e.what()).find("'d'"), std::string::npos);
    }
    save_mask_png(pred.path() / "d.png", BitMask(21, 12, 0));
    EXPECT_EQ(code_of([&] { evaluate_dirs(pred.path(), gt.path()); }), ErrorCode::ShapeMismatch);

    TempDir empty;
    EXPECT_EQ(code_of([&] { evaluate_dirs(empty.path(), empty.path()); }), ErrorCode::EmptyInput);
}
