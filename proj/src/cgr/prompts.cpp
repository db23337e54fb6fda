#include "glyphseg/cgr/prompts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glyphseg/error.hpp"

namespace glyphseg {

namespace {
constexpr float kRepeatDepthFraction = 0.6f;
}

Point map_template_point(Point cell, const BBox& box, int grid) {
    if (box.empty() || grid < 1) throw Error(ErrorCode::InvalidArgument, "cannot map into an empty box");
    auto axis = [grid](int c, int lo, int len) {
        const int v = lo + static_cast<int>(std::floor((c + 0.5) * len / grid));
        return std::clamp(v, lo, lo + len - 1);
    };
    return {axis(cell.x, box.x_min, box.width()), axis(cell.y, box.y_min, box.height())};
}

Point unmap_template_point(Point pixel, const BBox& box, int grid) {
    if (box.empty() || grid < 1) throw Error(ErrorCode::InvalidArgument, "cannot map from an empty box");
    auto axis = [grid](int v, int lo, int len) {
        const int c = static_cast<int>(std::floor((v - lo + 0.5) * grid / len));
        return std::clamp(c, 0, grid - 1);
    };
    return {axis(pixel.x, box.x_min, box.width()), axis(pixel.y, box.y_min, box.height())};
}

std::vector<Point> sample_interior_points(const BitMask& mask, int k, Connectivity connectivity) {
    return sample_interior_points(mask, distance_transform(mask), k, connectivity);
}

std::vector<Point> sample_interior_points(const BitMask& mask, const ScoreMap& depth, int k,
                                          Connectivity connectivity) {
    std::vector<Point> out;
    if (k <= 0) return out;
    if (depth.width() != mask.width() || depth.height() != mask.height()) {
        throw Error(ErrorCode::ShapeMismatch, "depth map and mask differ in size");
    }
    const Components parts = connected_components(mask, connectivity);

    struct Part {
        std::vector<Point> candidates;  // row-major
        float deepest = 0.0f;
        std::vector<Point> picked;
        bool done = false;
    };
    std::vector<Part> state(parts.items.size());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const int l = parts.labels.at(x, y);
            if (l == 0) continue;
            Part& p = state[static_cast<std::size_t>(l - 1)];
            p.candidates.push_back({x, y});
            p.deepest = std::max(p.deepest, depth.at(x, y));
        }
    }

    auto next_point = [&](Part& p) -> bool {
        if (p.picked.empty()) {
            for (Point c : p.candidates) {
                if (depth.at(c) == p.deepest) {
                    p.picked.push_back(c);
                    return true;
                }
            }
            return false;
        }
        const float floor_depth = kRepeatDepthFraction * p.deepest;
        long best_dist = -1;
        float best_depth = 0.0f;
        Point best{};
        for (Point c : p.candidates) {
            if (depth.at(c) < floor_depth || depth.at(c) <= 0.0f) continue;
            long nearest = std::numeric_limits<long>::max();
            for (Point q : p.picked) {
                const long dx = c.x - q.x, dy = c.y - q.y;
                nearest = std::min(nearest, dx * dx + dy * dy);
            }
            if (nearest == 0) continue;
            if (nearest > best_dist || (nearest == best_dist && depth.at(c) > best_depth)) {
                best_dist = nearest;
                best_depth = depth.at(c);
                best = c;
            }
        }
        if (best_dist < 0) return false;
        p.picked.push_back(best);
        return true;
    };

    bool progress = true;
    while (static_cast<int>(out.size()) < k && progress) {
        progress = false;
        for (Part& p : state) {
            if (static_cast<int>(out.size()) >= k) break;
            if (p.done) continue;
            if (next_point(p)) {
                out.push_back(p.picked.back());
                progress = true;
            } else {
                p.done = true;
            }
        }
    }
    return out;
}

ScoreMap agreement_depth(const GlyphVoteTable& table, VoteKind kind, double tau) {
    ScoreMap depth(table.grid, table.grid, 0.0f);
    const auto& counts = kind == VoteKind::Foreground ? table.fg_counts : table.hole_counts;
    BitMask level(table.grid, table.grid);
    for (int v = min_votes(table.n_templates, tau); v <= table.n_templates; ++v) {
        for (std::size_t i = 0; i < counts.size(); ++i) level[i] = counts[i] >= v;
        if (count(level) == 0) break;
        const ScoreMap d = distance_transform(level);
        for (std::size_t i = 0; i < d.size(); ++i) depth[i] += d[i];
    }
    return depth;
}

TemplatePrompts sample_template_prompts(const GlyphVoteTable& table, const CgrConfig& config) {
    if (config.k_pos < 0 || config.k_neg < 0) throw Error(ErrorCode::InvalidArgument, "point counts must be >= 0");
    TemplatePrompts t;
    t.positives = sample_interior_points(consensus_mask(table, VoteKind::Foreground, config.tau),
                                         agreement_depth(table, VoteKind::Foreground, config.tau), config.k_pos,
                                         Connectivity::Eight);
    t.negatives = sample_interior_points(consensus_mask(table, VoteKind::Hole, config.tau),
                                         agreement_depth(table, VoteKind::Hole, config.tau), config.k_neg,
                                         Connectivity::Four);
    return t;
}

PromptSet place_prompts(const TemplatePrompts& prompts, const BBox& box, int grid, char category) {
    PromptSet out;
    out.box = box;
    out.category = category;
    for (Point p : prompts.positives) {
        const Point q = map_template_point(p, box, grid);
        if (std::find(out.positives.begin(), out.positives.end(), q) == out.positives.end()) out.positives.push_back(q);
    }
    for (Point p : prompts.negatives) {
        const Point q = map_template_point(p, box, grid);
        if (std::find(out.positives.begin(), out.positives.end(), q) != out.positives.end()) continue;
        if (std::find(out.negatives.begin(), out.negatives.end(), q) == out.negatives.end()) out.negatives.push_back(q);
    }
    return out;
}

namespace {

const GlyphVoteTable& table_for(const TemplateBank& bank, char category) {
    const GlyphVoteTable* t = bank.find(category);
    if (!t) throw Error(ErrorCode::UnknownCategory, std::string("no glyph templates for '") + category + "'");
    return *t;
}

}  // namespace

PromptSet prompts_for_char(const CharAnnotation& ch, const TemplateBank& bank, const CgrConfig& config) {
    if (ch.bbox.empty()) throw Error(ErrorCode::InvalidArgument, "character box is empty");
    const GlyphVoteTable& table = table_for(bank, ch.category);
    return place_prompts(sample_template_prompts(table, config), ch.bbox, table.grid, ch.category);
}

PromptGenerator::PromptGenerator(const TemplateBank& bank, CgrConfig config) : bank_(bank), config_(config) {
    if (!(config_.tau > 0.0 && config_.tau <= 1.0)) throw Error(ErrorCode::ConfigError, "tau must lie in (0, 1]");
    if (config_.k_pos < 0 || config_.k_neg < 0) throw Error(ErrorCode::ConfigError, "point counts must be >= 0");
}

PromptSet PromptGenerator::prompts_for_char(const CharAnnotation& ch) const {
    if (ch.bbox.empty()) throw Error(ErrorCode::InvalidArgument, "character box is empty");
    const GlyphVoteTable& table = table_for(bank_, ch.category);
    std::shared_ptr<const TemplatePrompts> sampled;
    {
        std::lock_guard lock(mutex_);
        auto& slot = cache_[ch.category];
        if (!slot) slot = std::make_shared<const TemplatePrompts>(sample_template_prompts(table, config_));
        sampled = slot;
    }
    return place_prompts(*sampled, ch.bbox, table.grid, ch.category);
}

}  // namespace glyphseg
