#include <gtest/gtest.h>

#include "glyphseg/glyph/templates.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

std::vector<Font> bank_fonts() {
    std::vector<Font> out;
    for (const auto& p : list_font_files(font_root() / "bank")) out.push_back(Font::load(p));
    return out;
}

GlyphTemplate random_template(Rng& rng, char category, int grid) {
    GlyphTemplate t;
    t.category = category;
    t.grid = random_mask(rng, grid, grid, rng.uniform());
    t.hole = mask_and_not(hole_mask(t.grid), t.grid);
    return t;
}

}  // namespace

TEST(Rasterize, TemplateInvariants) {
    for (const Font& f : bank_fonts()) {
        for (char c : std::string("OLBgae8")) {
            const GlyphTemplate t = rasterize_glyph(f, c);
            SCOPED_TRACE(f.id() + " " + c);
            EXPECT_EQ(t.grid.width(), kDefaultGrid);
            EXPECT_EQ(tight_bbox(t.grid), t.grid.bounds());
            EXPECT_TRUE(mask_and(t.hole, t.grid) == BitMask(kDefaultGrid, kDefaultGrid, 0));
            EXPECT_TRUE(mask_and(t.hole, flood_from_border(t.grid)) == BitMask(kDefaultGrid, kDefaultGrid, 0));
        }
    }
}

TEST(Rasterize, CounterTopology) {
    int two_counter_b = 0;
    const auto fonts = bank_fonts();
    for (const Font& f : fonts) {
        SCOPED_TRACE(f.id());
        const GlyphTemplate o = rasterize_glyph(f, 'O');
        EXPECT_EQ(connected_components(o.hole, Connectivity::Four).items.size(), 1u);
        EXPECT_EQ(count(rasterize_glyph(f, 'L').hole), 0);
        two_counter_b += connected_components(rasterize_glyph(f, 'B').hole, Connectivity::Four).items.size() == 2;
    }
    // Counted rather than assumed: every bundled font draws 'B' with two counters.
    EXPECT_EQ(two_counter_b, static_cast<int>(fonts.size()));
}

TEST(Rasterize, MissingGlyph) {
    try {
        rasterize_glyph(bank_fonts().front(), ' ');
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingGlyph);
    }
}

TEST(VoteTable, SingleTemplate) {
    Rng rng(2);
    const GlyphTemplate t = random_template(rng, 'x', 16);
    const GlyphVoteTable table = build_vote_table(std::vector{t});
    EXPECT_EQ(consensus_mask(table, VoteKind::Foreground, 1.0), t.grid);
    EXPECT_EQ(consensus_mask(table, VoteKind::Hole, 1.0), t.hole);
}

TEST(VoteTable, SevenOfTen) {
    std::vector<GlyphTemplate> ts(10);
    for (int i = 0; i < 10; ++i) {
        ts[i].category = 'q';
        ts[i].grid = BitMask(4, 4, 0);
        ts[i].hole = BitMask(4, 4, 0);
        ts[i].grid.at(1, 1) = i < 7;
        ts[i].grid.at(2, 2) = i < 5;
    }
    const GlyphVoteTable table = build_vote_table(ts);
    EXPECT_DOUBLE_EQ(table.fg_vote(1, 1), 0.7);
    const BitMask m = consensus_mask(table, VoteKind::Foreground, 0.6);
    EXPECT_EQ(m.at(1, 1), 1);
    EXPECT_EQ(m.at(2, 2), 0);
}

TEST(VoteTable, MatchesRecount) {
    Rng rng(6);
    for (int round = 0; round < 200; ++round) {
        const int n = static_cast<int>(rng.uniform_int(1, 8));
        std::vector<GlyphTemplate> ts;
        for (int i = 0; i < n; ++i) ts.push_back(random_template(rng, 'k', 16));
        const GlyphVoteTable table = build_vote_table(ts);
        ASSERT_EQ(table.n_templates, n);
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                int fg = 0, hole = 0;
                for (const auto& t : ts) {
                    fg += t.grid.at(x, y);
                    hole += t.hole.at(x, y);
                }
                ASSERT_EQ(table.fg_counts[y * 16 + x], fg);
                ASSERT_EQ(table.hole_counts[y * 16 + x], hole);
                ASSERT_LE(fg + hole, n);
            }
        }
        // Unanimity is the intersection, any-voter the union.
        BitMask all(16, 16, 1), any(16, 16, 0);
        for (const auto& t : ts) {
            all = mask_and(all, t.grid);
            any = mask_or(any, t.grid);
        }
        EXPECT_EQ(consensus_mask(table, VoteKind::Foreground, 1.0), all);
        EXPECT_EQ(consensus_mask(table, VoteKind::Foreground, 1e-9), any);

        double prev_tau = 0.05;
        BitMask prev = consensus_mask(table, VoteKind::Foreground, prev_tau);
        for (double tau = 0.1; tau <= 1.0; tau += 0.05) {
            const BitMask cur = consensus_mask(table, VoteKind::Foreground, tau);
            EXPECT_TRUE(is_subset(cur, prev)) << prev_tau << " -> " << tau;
            prev = cur;
            prev_tau = tau;
            if (tau > 0.5) {
                EXPECT_EQ(count(mask_and(cur, consensus_mask(table, VoteKind::Hole, tau))), 0);
            }
        }
    }
}

TEST(VoteTable, Errors) {
    try {
        build_vote_table(std::vector<GlyphTemplate>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyTemplateSet);
    }
    EXPECT_EQ(min_votes(10, 0.6), 6);
    EXPECT_EQ(min_votes(18, 0.6), 11);
    EXPECT_EQ(min_votes(5, 1.0), 5);
}

TEST(CategorySpec, Parse) {
    EXPECT_EQ(parse_category_spec("A-Za-z0-9").size(), 62u);
    EXPECT_THROW(parse_category_spec("c-a"), Error);
    EXPECT_THROW(parse_category_spec("a b"), Error);
    EXPECT_EQ(parse_category_spec("A-C.,!A"), "!,.ABC");
}

TEST(Bank, SharedBankCoversDefaultSet) {
    const TemplateBank& bank = shared_bank();
    EXPECT_GE(bank.n_fonts, 10);
    EXPECT_EQ(bank.tables.size(), 62u);
    for (const auto& [c, t] : bank.tables) EXPECT_EQ(t.n_templates, bank.n_fonts) << c;
}

TEST(Bank, SerializationRoundTrip) {
    const TemplateBank& bank = shared_bank();
    const auto bytes = serialize_bank(bank);
    EXPECT_EQ(deserialize_bank(bytes), bank);
    EXPECT_EQ(serialize_bank(deserialize_bank(bytes)), bytes);
    TempDir dir;
    save_bank(dir.path() / "bank.bin", bank);
    EXPECT_EQ(load_bank(dir.path() / "bank.bin"), bank);

    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_THROW(deserialize_bank(truncated), Error);
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(deserialize_bank(trailing), Error);
}

TEST(Bank, OneFontIsInsufficient) {
    const auto files = list_font_files(font_root() / "bank");
    try {
        build_template_bank(std::vector{files.front()}, "A-C");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientFonts);
    }
}

TEST(Bank, BrokenFontReportedNotFatal) {
    TempDir dir;
    const auto files = list_font_files(font_root() / "bank");
    std::filesystem::copy_file(files[0], dir.path() / "a.ttf");
    std::filesystem::copy_file(files[1], dir.path() / "b.ttf");
    write_text(dir.path() / "c.ttf", "not a font");
    const BankBuild built = build_template_bank(dir.path(), "A-C", kDefaultGrid, 2);
    EXPECT_EQ(built.bank.n_fonts, 2);
    EXPECT_EQ(built.bank.tables.size(), 3u);
    ASSERT_EQ(built.report.failures.size(), 1u);
    EXPECT_EQ(built.report.failures[0].category, '\0');
}
