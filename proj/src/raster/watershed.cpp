#include "glyphseg/raster/watershed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>

#include "glyphseg/raster/morphology.hpp"

namespace glyphseg {

namespace {

constexpr int kDx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kDy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

void check_inputs(const ScoreMap& scores, const BitMask& domain, int k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "watershed needs k >= 1");
    if (scores.width() != domain.width() || scores.height() != domain.height()) {
        throw Error(ErrorCode::ShapeMismatch, "scores and domain differ in shape");
    }
    if (count(domain) < k) {
        throw Error(ErrorCode::InvalidArgument, "domain has fewer than k pixels");
    }
}

bool ranks_before(const Marker& a, const Marker& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.at < b.at;
}

}  // namespace

int marker_nms_radius(int domain_width, int k) {
    const int r = (domain_width + 2 * k - 1) / (2 * k);
    return std::max(2, r);
}

std::vector<Marker> plateau_maxima(const ScoreMap& scores, const BitMask& domain) {
    const int w = scores.width();
    const int h = scores.height();
    BitMask visited(w, h, 0);
    std::vector<Marker> out;
    std::deque<Point> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!domain.at(x, y) || visited.at(x, y)) continue;
            const float level = scores.at(x, y);
            bool is_max = true;
            visited.at(x, y) = 1;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Point p = queue.front();
                queue.pop_front();
                for (int n = 0; n < 8; ++n) {
                    const int nx = p.x + kDx8[n];
                    const int ny = p.y + kDy8[n];
                    if (!domain.in_bounds(nx, ny) || !domain.at(nx, ny)) continue;
                    const float v = scores.at(nx, ny);
                    if (v > level) {
                        is_max = false;
                    } else if (v == level && !visited.at(nx, ny)) {
                        visited.at(nx, ny) = 1;
                        queue.push_back({nx, ny});
                    }
                }
            }
            if (is_max) out.push_back({{x, y}, level});
        }
    }
    std::stable_sort(out.begin(), out.end(), ranks_before);
    return out;
}

std::vector<Marker> select_markers(const ScoreMap& scores, const BitMask& domain, int k) {
    check_inputs(scores, domain, k);
    const std::vector<Marker> ranked = plateau_maxima(scores, domain);
    std::vector<bool> taken(ranked.size(), false);
    std::vector<Marker> chosen;

    BitMask positive(scores.width(), scores.height(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) positive[i] = domain[i] && scores[i] > 0.0f;
    const Components comps = connected_components(positive, Connectivity::Eight);
    for (const Component& comp : comps.items) {
        if (static_cast<int>(chosen.size()) == k) break;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            if (comps.labels.at(ranked[i].at) == comp.label) {
                chosen.push_back(ranked[i]);
                taken[i] = true;
                break;
            }
        }
    }

    const BBox dom_box = tight_bbox(domain);
    const int radius = marker_nms_radius(dom_box.width(), k);
    for (std::size_t i = 0; i < ranked.size() && static_cast<int>(chosen.size()) < k; ++i) {
        if (taken[i]) continue;
        const Point p = ranked[i].at;
        const bool clear = std::all_of(chosen.begin(), chosen.end(), [&](const Marker& m) {
            return std::max(std::abs(m.at.x - p.x), std::abs(m.at.y - p.y)) > radius;
        });
        if (clear) chosen.push_back(ranked[i]);
    }
    if (static_cast<int>(chosen.size()) < k) {
        throw Error(ErrorCode::InsufficientPeaks, "found " + std::to_string(chosen.size()) +
                                                      " separable maxima, need " + std::to_string(k));
    }
    return chosen;
}

LabelMap watershed_partition(const ScoreMap& scores, const BitMask& domain, int k) {
    check_inputs(scores, domain, k);
    const int w = scores.width();
    const int h = scores.height();
    LabelMap labels(w, h, 0);
    if (k == 1) {
        for (std::size_t i = 0; i < domain.size(); ++i) labels[i] = domain[i] ? 1 : 0;
        return labels;
    }

    const std::vector<Marker> markers = select_markers(scores, domain, k);

    struct Entry {
        float score;
        std::uint64_t seq;
        int x, y;
        std::int32_t label;
    };
    auto lower_priority = [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.seq > b.seq;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(lower_priority)> heap(lower_priority);
    std::uint64_t seq = 0;

    auto push_neighbors = [&](int x, int y, std::int32_t label) {
        for (int n = 0; n < 8; ++n) {
            const int nx = x + kDx8[n];
            const int ny = y + kDy8[n];
            if (!domain.in_bounds(nx, ny) || !domain.at(nx, ny) || labels.at(nx, ny) != 0) continue;
            heap.push({scores.at(nx, ny), seq++, nx, ny, label});
        }
    };

    for (std::size_t i = 0; i < markers.size(); ++i) {
        labels.at(markers[i].at) = static_cast<std::int32_t>(i + 1);
    }
    for (std::size_t i = 0; i < markers.size(); ++i) {
        push_neighbors(markers[i].at.x, markers[i].at.y, static_cast<std::int32_t>(i + 1));
    }
    while (!heap.empty()) {
        const Entry e = heap.top();
        heap.pop();
        if (labels.at(e.x, e.y) != 0) continue;
        labels.at(e.x, e.y) = e.label;
        push_neighbors(e.x, e.y, e.label);
    }

    // Domain pieces not connected to any marker.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!domain.at(x, y) || labels.at(x, y) != 0) continue;
            std::int64_t best = -1;
            std::int32_t best_label = 1;
            for (std::size_t i = 0; i < markers.size(); ++i) {
                const std::int64_t dx = markers[i].at.x - x;
                const std::int64_t dy = markers[i].at.y - y;
                const std::int64_t d2 = dx * dx + dy * dy;
                if (best < 0 || d2 < best) {
                    best = d2;
                    best_label = static_cast<std::int32_t>(i + 1);
                }
            }
            labels.at(x, y) = best_label;
        }
    }
    return labels;
}

}  // namespace glyphseg
