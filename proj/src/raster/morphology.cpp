#include "glyphseg/raster/morphology.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace glyphseg {

namespace {

constexpr int kDx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kDy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr int kDx4[4] = {0, -1, 1, 0};
constexpr int kDy4[4] = {-1, 0, 0, 1};

}  // namespace

Components connected_components(const BitMask& mask, Connectivity connectivity) {
    const int w = mask.width();
    const int h = mask.height();
    LabelMap provisional(w, h, 0);
    std::vector<Component> found;
    std::deque<Point> queue;
    const bool eight = connectivity == Connectivity::Eight;
    const int n_neighbors = eight ? 8 : 4;
    const int* dx = eight ? kDx8 : kDx4;
    const int* dy = eight ? kDy8 : kDy4;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || provisional.at(x, y) != 0) continue;
            Component comp;
            comp.label = static_cast<int>(found.size()) + 1;
            comp.first = {x, y};
            comp.box = {x, y, x + 1, y + 1};
            provisional.at(x, y) = comp.label;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Point p = queue.front();
                queue.pop_front();
                ++comp.area;
                comp.box = unite(comp.box, BBox{p.x, p.y, p.x + 1, p.y + 1});
                for (int k = 0; k < n_neighbors; ++k) {
                    const int nx = p.x + dx[k];
                    const int ny = p.y + dy[k];
                    if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny) || provisional.at(nx, ny) != 0) {
                        continue;
                    }
                    provisional.at(nx, ny) = comp.label;
                    queue.push_back({nx, ny});
                }
            }
            found.push_back(comp);
        }
    }

    // Discovery order is row-major by first pixel, so a stable sort on area
    // leaves ties in that order.
    std::stable_sort(found.begin(), found.end(),
                     [](const Component& a, const Component& b) { return a.area > b.area; });
    std::vector<std::int32_t> relabel(found.size() + 1, 0);
    for (std::size_t i = 0; i < found.size(); ++i) {
        relabel[found[i].label] = static_cast<std::int32_t>(i + 1);
        found[i].label = static_cast<int>(i + 1);
    }
    for (std::size_t i = 0; i < provisional.size(); ++i) provisional[i] = relabel[provisional[i]];
    return {std::move(provisional), std::move(found)};
}

BitMask flood_from_border(const BitMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    BitMask reached(w, h, 0);
    std::deque<Point> queue;
    auto seed = [&](int x, int y) {
        if (!mask.at(x, y) && !reached.at(x, y)) {
            reached.at(x, y) = 1;
            queue.push_back({x, y});
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        for (int k = 0; k < 4; ++k) {
            const int nx = p.x + kDx4[k];
            const int ny = p.y + kDy4[k];
            if (mask.in_bounds(nx, ny) && !mask.at(nx, ny) && !reached.at(nx, ny)) {
                reached.at(nx, ny) = 1;
                queue.push_back({nx, ny});
            }
        }
    }
    return reached;
}

BitMask hole_mask(const BitMask& mask) {
    const BitMask outside = flood_from_border(mask);
    BitMask holes(mask.width(), mask.height(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) holes[i] = !mask[i] && !outside[i];
    return holes;
}

ScoreMap distance_transform(const BitMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    constexpr int kInf = std::numeric_limits<int>::max() / 2;
    std::vector<int> d(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) d[i] = mask[i] ? kInf : 0;
    auto value = [&](int x, int y) {
        return (x < 0 || y < 0 || x >= w || y >= h) ? 0 : d[std::size_t(y) * w + x];
    };
    // Forward pass: neighbours above and to the left.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int& v = d[std::size_t(y) * w + x];
            if (v == 0) continue;
            v = std::min({v, value(x - 1, y) + 1, value(x - 1, y - 1) + 1, value(x, y - 1) + 1,
                          value(x + 1, y - 1) + 1});
        }
    }
    // Backward pass: neighbours below and to the right.
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            int& v = d[std::size_t(y) * w + x];
            if (v == 0) continue;
            v = std::min({v, value(x + 1, y) + 1, value(x + 1, y + 1) + 1, value(x, y + 1) + 1,
                          value(x - 1, y + 1) + 1});
        }
    }
    ScoreMap out(w, h, 0.0f);
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = static_cast<float>(d[i]);
    return out;
}

ScoreMap signed_distance(const BitMask& mask) {
    const ScoreMap inside = distance_transform(mask);
    const ScoreMap outside = distance_transform(invert(mask));
    ScoreMap out(mask.width(), mask.height(), 0.0f);
    for (std::size_t k = 0; k < mask.size(); ++k) out[k] = mask[k] ? inside[k] : -outside[k];
    return out;
}

}  // namespace glyphseg
