#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

/// Binary glyph render. `ink` is positioned at (x_offset, y_offset) relative
/// to the pen position on the baseline.
struct GlyphBitmap {
    BitMask ink;
    int x_offset = 0;
    int y_offset = 0;
    float advance = 0.0f;
};

/// TrueType/OpenType font file. Cheap to copy; copies share the font data.
class Font {
public:
    /// Throws FontLoadError when the file is unreadable or not a font.
    static Font load(const std::filesystem::path& path);

    /// File stem, used as the font identifier in reports.
    const std::string& id() const;

    bool has_glyph(char32_t codepoint) const;

    /// Renders at `pixel_height` (ascent-to-descent span) and thresholds the
    /// antialiased coverage at one half. Throws MissingGlyph when the font
    /// has no glyph or the glyph renders empty.
    GlyphBitmap render(char32_t codepoint, float pixel_height) const;

    /// Baseline-to-top distance in pixels at `pixel_height`.
    float ascent(float pixel_height) const;

private:
    struct Impl;
    explicit Font(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// All *.ttf / *.otf files in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_font_files(const std::filesystem::path& dir);

}  // namespace glyphseg
