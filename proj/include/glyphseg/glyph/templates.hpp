#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glyphseg/glyph/font.hpp"
#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

inline constexpr int kDefaultGrid = 64;
inline constexpr double kDefaultVoteThreshold = 0.6;
inline constexpr float kTemplateRenderHeight = 256.0f;

/// One category rendered in one font and normalised onto a G x G grid.
struct GlyphTemplate {
    char category = '?';
    std::string font_id;
    BitMask grid;  // ink, stretched so it touches all four borders
    BitMask hole;  // background enclosed by ink
};

/// Stretches the tight ink box of `ink` anisotropically onto a grid x grid
/// raster. A cell is ink when at least half its area is ink; a border row or
/// column left empty gets its highest-coverage cell set so the result stays
/// tight.
BitMask normalize_to_grid(const BitMask& ink, int grid);

GlyphTemplate rasterize_glyph(const Font& font, char category, int grid = kDefaultGrid);

enum class VoteKind { Foreground, Hole };

/// Per-pixel vote counts over the templates of one category. Fractions are
/// count / n_templates; counts are what gets stored so round trips are exact.
struct GlyphVoteTable {
    char category = '?';
    int grid = kDefaultGrid;
    int n_templates = 0;
    std::vector<std::uint16_t> fg_counts;
    std::vector<std::uint16_t> hole_counts;

    double fg_vote(int x, int y) const { return double(fg_counts[std::size_t(y) * grid + x]) / n_templates; }
    double hole_vote(int x, int y) const { return double(hole_counts[std::size_t(y) * grid + x]) / n_templates; }

    friend bool operator==(const GlyphVoteTable&, const GlyphVoteTable&) = default;
};

/// Throws EmptyTemplateSet for no templates and InvalidArgument when the
/// templates disagree on category or grid size.
GlyphVoteTable build_vote_table(std::span<const GlyphTemplate> templates);

/// Smallest vote count c with c / n >= tau.
int min_votes(int n_templates, double tau);

/// Pixels whose vote fraction is >= tau, 0 < tau <= 1.
BitMask consensus_mask(const GlyphVoteTable& table, VoteKind kind, double tau);

// ---------------------------------------------------------------------------

struct TemplateBank {
    int grid = kDefaultGrid;
    int n_fonts = 0;
    std::map<char, GlyphVoteTable> tables;

    const GlyphVoteTable* find(char category) const {
        auto it = tables.find(category);
        return it == tables.end() ? nullptr : &it->second;
    }
    friend bool operator==(const TemplateBank&, const TemplateBank&) = default;
};

struct BuildFailure {
    std::string font;
    char category = '\0';  // '\0' when the whole font failed to load
    std::string reason;
};

struct BankBuildReport {
    std::vector<std::string> fonts_loaded;
    std::vector<BuildFailure> failures;
    std::vector<char> skipped_categories;  // fewer than two templates
};

struct BankBuild {
    TemplateBank bank;
    BankBuildReport report;
};

/// Expands a category spec such as "A-Za-z0-9" or "A-Z.,!" into the sorted
/// set of distinct characters. Throws InvalidArgument on spaces, non-ASCII
/// or reversed ranges.
std::string parse_category_spec(const std::string& spec);

inline const std::string kDefaultCategories = "A-Za-z0-9";

/// Renders every (font, category) pair, in parallel across `threads` workers.
/// Per-font failures are reported, not fatal. Throws InsufficientFonts when
/// fewer than two fonts yield any template.
BankBuild build_template_bank(const std::filesystem::path& font_dir, const std::string& categories,
                              int grid = kDefaultGrid, int threads = 0);

/// Same, over explicit font files (used by tests for held-out splits).
BankBuild build_template_bank(const std::vector<std::filesystem::path>& fonts,
                              const std::string& categories, int grid = kDefaultGrid, int threads = 0);

std::vector<std::uint8_t> serialize_bank(const TemplateBank& bank);
TemplateBank deserialize_bank(const std::vector<std::uint8_t>& bytes);
void save_bank(const std::filesystem::path& path, const TemplateBank& bank);
TemplateBank load_bank(const std::filesystem::path& path);

}  // namespace glyphseg
