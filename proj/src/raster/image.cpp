#include "glyphseg/raster/image.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace glyphseg {

RgbImage::RgbImage(int width, int height, std::array<std::uint8_t, 3> fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error(ErrorCode::InvalidArgument, "negative image size");
    data_.resize(std::size_t(width) * std::size_t(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill[0];
        data_[i + 1] = fill[1];
        data_[i + 2] = fill[2];
    }
}

RgbImage RgbImage::crop(const BBox& box) const {
    const BBox b = intersect(box, bounds());
    RgbImage out(b.width(), b.height());
    for (int y = b.y_min; y < b.y_max; ++y) {
        std::memcpy(out.pixel(0, y - b.y_min), pixel(b.x_min, y), std::size_t(b.width()) * 3);
    }
    return out;
}

namespace {

std::vector<std::uint8_t> encode(const void* pixels, int width, int height, png_uint_32 format) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
        throw Error(ErrorCode::IoError, std::string("png encode: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
        throw Error(ErrorCode::IoError, std::string("png encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> decode(const std::vector<std::uint8_t>& bytes, png_uint_32 format,
                                 int& width, int& height) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw Error(ErrorCode::ParseError, std::string("png decode: ") + image.message);
    }
    image.format = format;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(ErrorCode::ParseError, std::string("png decode: ") + image.message);
    }
    width = static_cast<int>(image.width);
    height = static_cast<int>(image.height);
    return pixels;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const BitMask& mask) {
    if (mask.empty()) throw Error(ErrorCode::InvalidArgument, "cannot encode an empty mask");
    std::vector<std::uint8_t> gray(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
    return encode(gray.data(), mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
    if (image.width() == 0 || image.height() == 0) {
        throw Error(ErrorCode::InvalidArgument, "cannot encode an empty image");
    }
    return encode(image.bytes().data(), image.width(), image.height(), PNG_FORMAT_RGB);
}

BitMask decode_png_mask(const std::vector<std::uint8_t>& bytes) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> gray = decode(bytes, PNG_FORMAT_GRAY, w, h);
    for (auto& v : gray) v = v != 0;
    return BitMask(w, h, std::move(gray));
}

RgbImage decode_png_rgb(const std::vector<std::uint8_t>& bytes) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> rgb = decode(bytes, PNG_FORMAT_RGB, w, h);
    RgbImage out(w, h);
    out.bytes() = std::move(rgb);
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

BitMask load_mask_png(const std::filesystem::path& path) { return decode_png_mask(read_file(path)); }

void save_mask_png(const std::filesystem::path& path, const BitMask& mask) {
    write_file(path, encode_png(mask));
}

RgbImage load_rgb_png(const std::filesystem::path& path) { return decode_png_rgb(read_file(path)); }

void save_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    write_file(path, encode_png(image));
}

}  // namespace glyphseg
