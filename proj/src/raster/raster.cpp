#include "glyphseg/raster/raster.hpp"

#include <algorithm>

#include "glyphseg/simd/kernels.hpp"

namespace glyphseg {

double iou(const BBox& a, const BBox& b) {
    const std::int64_t inter = intersect(a, b).area();
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::ostream& operator<<(std::ostream& os, const Point& p) {
    return os << "(" << p.x << "," << p.y << ")";
}

std::ostream& operator<<(std::ostream& os, const BBox& b) {
    return os << "[" << b.x_min << "," << b.y_min << "," << b.x_max << "," << b.y_max << ")";
}

std::int64_t count(const BitMask& mask) {
    return std::count_if(mask.pixels().begin(), mask.pixels().end(),
                         [](std::uint8_t v) { return v != 0; });
}

BBox tight_bbox(const BitMask& mask) {
    int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return {};
    return {x0, y0, x1 + 1, y1 + 1};
}

BitMask crop(const BitMask& mask, const BBox& box) {
    BitMask out(std::max(box.width(), 0), std::max(box.height(), 0));
    const BBox src = intersect(box, mask.bounds());
    for (int y = src.y_min; y < src.y_max; ++y) {
        for (int x = src.x_min; x < src.x_max; ++x) {
            out.at(x - box.x_min, y - box.y_min) = mask.at(x, y);
        }
    }
    return out;
}

void paste_or(BitMask& dst, const BitMask& patch, Point origin) {
    const BBox target = intersect(
        BBox{origin.x, origin.y, origin.x + patch.width(), origin.y + patch.height()}, dst.bounds());
    if (target.empty()) return;
    const auto& kernels = simd::active_kernels();
    for (int y = target.y_min; y < target.y_max; ++y) {
        std::uint8_t* row = &dst.at(target.x_min, y);
        const std::uint8_t* src = &patch.at(target.x_min - origin.x, y - origin.y);
        kernels.merge_or(row, src, static_cast<std::size_t>(target.width()));
    }
}

BitMask invert(const BitMask& mask) {
    BitMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] == 0;
    return out;
}

namespace {
void require_same(const BitMask& a, const BitMask& b) {
    if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "mask shapes differ");
}
}  // namespace

BitMask mask_and(const BitMask& a, const BitMask& b) {
    require_same(a, b);
    BitMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
    return out;
}

BitMask mask_or(const BitMask& a, const BitMask& b) {
    require_same(a, b);
    BitMask out = a;
    simd::active_kernels().merge_or(out.data(), b.data(), out.size());
    return out;
}

BitMask mask_and_not(const BitMask& a, const BitMask& b) {
    require_same(a, b);
    BitMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && !b[i];
    return out;
}

bool is_subset(const BitMask& a, const BitMask& b) {
    require_same(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && !b[i]) return false;
    }
    return true;
}

}  // namespace glyphseg
