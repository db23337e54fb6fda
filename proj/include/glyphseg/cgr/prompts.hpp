#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "glyphseg/glyph/templates.hpp"
#include "glyphseg/io/annotation.hpp"
#include "glyphseg/raster/morphology.hpp"

namespace glyphseg {

struct PromptSet {
    BBox box;
    std::vector<Point> positives;
    std::vector<Point> negatives;
    char category = '?';
};

struct CgrConfig {
    double tau = kDefaultVoteThreshold;
    int k_pos = 5;
    int k_neg = 3;
};

/// Template cell -> image pixel: the pixel containing the cell centre after
/// stretching the grid over `box`, clamped inside the box.
Point map_template_point(Point cell, const BBox& box, int grid);

/// Image pixel -> template cell containing the pixel centre. Inverts
/// map_template_point exactly when the box is at least grid x grid.
Point unmap_template_point(Point pixel, const BBox& box, int grid);

/// Up to `k` interior points of `mask`, taken per connected component in
/// descending area order and cycling over the components. A component's
/// first point is its depth maximum (row-major ties); later ones are the
/// farthest from the component's earlier picks among pixels at least 0.6 as
/// deep as that maximum (ties: deeper, then row-major). Depth defaults to
/// the chessboard distance transform of `mask`.
std::vector<Point> sample_interior_points(const BitMask& mask, int k, Connectivity connectivity);
std::vector<Point> sample_interior_points(const BitMask& mask, const ScoreMap& depth, int k,
                                          Connectivity connectivity);

/// Sum over vote levels v >= min_votes(n, tau) of the distance transform of
/// {count >= v}. Peaks where many fonts agree deep inside the stroke, which
/// keeps sampled points away from places where fonts differ (serifs, stroke
/// ends, corners).
ScoreMap agreement_depth(const GlyphVoteTable& table, VoteKind kind, double tau);

/// Sampled prompts for one category, in the template frame.
struct TemplatePrompts {
    std::vector<Point> positives;
    std::vector<Point> negatives;
};

TemplatePrompts sample_template_prompts(const GlyphVoteTable& table, const CgrConfig& config);

/// Maps template prompts into `box`, dropping duplicate pixels and any
/// negative that lands on a positive.
PromptSet place_prompts(const TemplatePrompts& prompts, const BBox& box, int grid, char category);

/// Throws UnknownCategory when the bank has no table for the character.
PromptSet prompts_for_char(const CharAnnotation& ch, const TemplateBank& bank, const CgrConfig& config);

/// prompts_for_char with the per-category sampling cached. Keeps a
/// reference to `bank`. Safe for concurrent use.
class PromptGenerator {
public:
    PromptGenerator(const TemplateBank& bank, CgrConfig config);

    PromptSet prompts_for_char(const CharAnnotation& ch) const;
    const CgrConfig& config() const { return config_; }

private:
    const TemplateBank& bank_;
    CgrConfig config_;
    mutable std::mutex mutex_;
    mutable std::map<char, std::shared_ptr<const TemplatePrompts>> cache_;
};

}  // namespace glyphseg
