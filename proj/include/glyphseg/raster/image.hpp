#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

/// 8-bit interleaved RGB image.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, std::array<std::uint8_t, 3> fill = {0, 0, 0});

    int width() const { return width_; }
    int height() const { return height_; }
    BBox bounds() const { return {0, 0, width_, height_}; }

    std::uint8_t* pixel(int x, int y) { return &data_[(std::size_t(y) * width_ + x) * 3]; }
    const std::uint8_t* pixel(int x, int y) const { return &data_[(std::size_t(y) * width_ + x) * 3]; }
    std::vector<std::uint8_t>& bytes() { return data_; }
    const std::vector<std::uint8_t>& bytes() const { return data_; }

    /// Sub-image over `box` clamped to the image.
    RgbImage crop(const BBox& box) const;

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

// PNG codecs (libpng). Masks are stored as 8-bit grayscale 0/255 and any
// nonzero sample decodes to 1.
std::vector<std::uint8_t> encode_png(const BitMask& mask);
std::vector<std::uint8_t> encode_png(const RgbImage& image);
BitMask decode_png_mask(const std::vector<std::uint8_t>& bytes);
RgbImage decode_png_rgb(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

BitMask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const std::filesystem::path& path, const BitMask& mask);
RgbImage load_rgb_png(const std::filesystem::path& path);
void save_rgb_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace glyphseg
