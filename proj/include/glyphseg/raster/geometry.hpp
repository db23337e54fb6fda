#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>

namespace glyphseg {

/// Integer pixel coordinate (column x, row y).
struct Point {
    int x = 0;
    int y = 0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point& a, const Point& b) {
        // row-major order
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.x <=> b.x;
    }
};

/// Real-valued 2-vector, used for annotation quads and reading axes.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

using Quad = std::array<Vec2, 4>;

/// Half-open axis-aligned box: [x_min, x_max) x [y_min, y_max).
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    friend bool operator==(const BBox&, const BBox&) = default;

    int width() const { return x_max - x_min; }
    int height() const { return y_max - y_min; }
    bool empty() const { return x_max <= x_min || y_max <= y_min; }
    std::int64_t area() const {
        return empty() ? 0 : std::int64_t(width()) * std::int64_t(height());
    }
    bool contains(Point p) const {
        return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max;
    }
    bool contains(const BBox& b) const {
        return b.x_min >= x_min && b.y_min >= y_min && b.x_max <= x_max && b.y_max <= y_max;
    }
    Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
};

inline BBox intersect(const BBox& a, const BBox& b) {
    BBox r{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min),
           std::min(a.x_max, b.x_max), std::min(a.y_max, b.y_max)};
    if (r.empty()) return {};
    return r;
}

inline BBox unite(const BBox& a, const BBox& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min),
            std::max(a.x_max, b.x_max), std::max(a.y_max, b.y_max)};
}

/// Grow a box by `fraction` of its own size on every side.
inline BBox pad(const BBox& b, double fraction) {
    const int px = static_cast<int>(b.width() * fraction + 0.5);
    const int py = static_cast<int>(b.height() * fraction + 0.5);
    return {b.x_min - px, b.y_min - py, b.x_max + px, b.y_max + py};
}

inline BBox clamp_to(const BBox& b, int width, int height) {
    return intersect(b, BBox{0, 0, width, height});
}

/// Area intersection-over-union; 0 when both boxes are empty.
double iou(const BBox& a, const BBox& b);

std::ostream& operator<<(std::ostream& os, const Point& p);
std::ostream& operator<<(std::ostream& os, const BBox& b);

}  // namespace glyphseg
