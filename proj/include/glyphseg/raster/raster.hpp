#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/geometry.hpp"

namespace glyphseg {

/// Row-major 2D grid. Instantiated as BitMask (0/1 bytes), ScoreMap
/// (float logits) and LabelMap (int labels, 0 = unassigned).
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;
    Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width < 0 || height < 0) {
            throw Error(ErrorCode::InvalidArgument, "negative raster size");
        }
        data_.assign(std::size_t(width) * std::size_t(height), fill);
    }
    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width < 0 || height < 0 || data_.size() != std::size_t(width) * std::size_t(height)) {
            throw Error(ErrorCode::ShapeMismatch, "raster data does not match width x height");
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    BBox bounds() const { return {0, 0, width_, height_}; }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool same_shape(const Raster& o) const { return width_ == o.width_ && height_ == o.height_; }

    T& at(int x, int y) { return data_[std::size_t(y) * width_ + x]; }
    const T& at(int x, int y) const { return data_[std::size_t(y) * width_ + x]; }
    T& at(Point p) { return at(p.x, p.y); }
    const T& at(Point p) const { return at(p.x, p.y); }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> pixels() { return data_; }
    std::span<const T> pixels() const { return data_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using BitMask = Raster<std::uint8_t>;
using ScoreMap = Raster<float>;
using LabelMap = Raster<std::int32_t>;

/// Number of set pixels.
std::int64_t count(const BitMask& mask);

/// Tight box around set pixels; empty box when the mask is empty.
BBox tight_bbox(const BitMask& mask);

/// Copy `box` out of `mask` (pixels outside the source read as 0).
BitMask crop(const BitMask& mask, const BBox& box);

/// OR `patch` into `dst` with its top-left corner at `origin`; clipped to dst.
void paste_or(BitMask& dst, const BitMask& patch, Point origin);

BitMask invert(const BitMask& mask);
BitMask mask_and(const BitMask& a, const BitMask& b);
BitMask mask_or(const BitMask& a, const BitMask& b);
BitMask mask_and_not(const BitMask& a, const BitMask& b);
bool is_subset(const BitMask& a, const BitMask& b);

}  // namespace glyphseg
