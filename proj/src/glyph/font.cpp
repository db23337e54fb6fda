#include "glyphseg/glyph/font.hpp"

#include <algorithm>
#include <cctype>

#include <stb_truetype.h>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/image.hpp"

namespace glyphseg {

struct Font::Impl {
    std::string id;
    std::vector<std::uint8_t> data;
    stbtt_fontinfo info{};
};

Font Font::load(const std::filesystem::path& path) {
    auto impl = std::make_shared<Impl>();
    impl->id = path.stem().string();
    try {
        impl->data = read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorCode::FontLoadError, e.what());
    }
    if (impl->data.empty()) throw Error(ErrorCode::FontLoadError, path.string() + " is empty");
    const int offset = stbtt_GetFontOffsetForIndex(impl->data.data(), 0);
    if (offset < 0 || !stbtt_InitFont(&impl->info, impl->data.data(), offset)) {
        throw Error(ErrorCode::FontLoadError, path.string() + " is not a TrueType/OpenType font");
    }
    return Font(std::move(impl));
}

const std::string& Font::id() const { return impl_->id; }

bool Font::has_glyph(char32_t codepoint) const {
    return stbtt_FindGlyphIndex(&impl_->info, static_cast<int>(codepoint)) != 0;
}

float Font::ascent(float pixel_height) const {
    int asc = 0, desc = 0, gap = 0;
    stbtt_GetFontVMetrics(&impl_->info, &asc, &desc, &gap);
    return static_cast<float>(asc) * stbtt_ScaleForPixelHeight(&impl_->info, pixel_height);
}

GlyphBitmap Font::render(char32_t codepoint, float pixel_height) const {
    const int glyph = stbtt_FindGlyphIndex(&impl_->info, static_cast<int>(codepoint));
    if (glyph == 0) {
        throw Error(ErrorCode::MissingGlyph, impl_->id + " has no glyph for U+" + std::to_string(codepoint));
    }
    const float scale = stbtt_ScaleForPixelHeight(&impl_->info, pixel_height);
    int w = 0, h = 0, xoff = 0, yoff = 0;
    unsigned char* coverage =
        stbtt_GetGlyphBitmap(&impl_->info, scale, scale, glyph, &w, &h, &xoff, &yoff);
    GlyphBitmap out;
    if (coverage != nullptr && w > 0 && h > 0) {
        out.ink = BitMask(w, h);
        for (int i = 0; i < w * h; ++i) out.ink[static_cast<std::size_t>(i)] = coverage[i] >= 128;
    }
    stbtt_FreeBitmap(coverage, nullptr);
    if (out.ink.empty() || count(out.ink) == 0) {
        throw Error(ErrorCode::MissingGlyph, impl_->id + " renders U+" + std::to_string(codepoint) + " empty");
    }
    // Antialiased edges below the threshold can leave blank border rows.
    const BBox tight = tight_bbox(out.ink);
    out.ink = crop(out.ink, tight);
    int advance = 0, lsb = 0;
    stbtt_GetGlyphHMetrics(&impl_->info, glyph, &advance, &lsb);
    out.x_offset = xoff + tight.x_min;
    out.y_offset = yoff + tight.y_min;
    out.advance = static_cast<float>(advance) * scale;
    return out;
}

std::vector<std::filesystem::path> list_font_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".ttf" || ext == ".otf") out.push_back(entry.path());
    }
    if (ec) throw Error(ErrorCode::IoError, "cannot list font directory " + dir.string());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
    return out;
}

}  // namespace glyphseg
