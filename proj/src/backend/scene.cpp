#include "glyphseg/backend/scene.hpp"

#include <cstdio>
#include <optional>

#include "glyphseg/error.hpp"
#include "glyphseg/glyph/templates.hpp"
#include "glyphseg/util/rng.hpp"

namespace glyphseg {

ImageRecord SyntheticScene::record() const {
    ImageRecord r;
    r.id = id;
    r.file = id + ".png";
    r.width = image.width();
    r.height = image.height();
    for (const SceneWord& w : words) r.words.push_back({quad_from_box(w.box), w.text});
    return r;
}

std::vector<CharAnnotation> SyntheticScene::char_annotations() const {
    std::vector<CharAnnotation> out;
    out.reserve(chars.size());
    for (const SceneChar& c : chars) out.push_back({c.box, c.category, c.word, c.index});
    return out;
}

namespace {

struct PlacedGlyph {
    char category;
    BitMask ink;
    int x;  // relative to the word's pen origin
    int y;  // relative to the baseline
};

}  // namespace

SyntheticScene generate_scene(std::uint64_t seed, const SceneSpec& spec, const std::vector<Font>& fonts,
                              const std::string& id) {
    if (fonts.empty()) throw Error(ErrorCode::FontLoadError, "no fonts to render scenes with");
    if (spec.width < 1 || spec.height < 1 || spec.min_char_height < 4 ||
        spec.max_char_height < spec.min_char_height || spec.min_words < 0 ||
        spec.max_words < spec.min_words || spec.min_length < 1 || spec.max_length < spec.min_length) {
        throw Error(ErrorCode::InvalidArgument, "inconsistent scene spec");
    }
    const std::string cats = parse_category_spec(spec.categories);
    Rng rng(seed);

    SyntheticScene scene;
    scene.id = id;
    scene.seed = seed;
    const std::array<std::uint8_t, 3> paper = {std::uint8_t(rng.uniform_int(190, 255)),
                                               std::uint8_t(rng.uniform_int(190, 255)),
                                               std::uint8_t(rng.uniform_int(190, 255))};
    scene.image = RgbImage(spec.width, spec.height, paper);
    scene.gt = BitMask(spec.width, spec.height, 0);

    std::vector<int> lengths = spec.word_lengths;
    if (!spec.word_texts.empty()) {
        lengths.clear();
        for (const std::string& t : spec.word_texts) lengths.push_back(static_cast<int>(t.size()));
    }
    if (lengths.empty()) {
        const int n = static_cast<int>(rng.uniform_int(spec.min_words, spec.max_words));
        for (int i = 0; i < n; ++i) lengths.push_back(static_cast<int>(rng.uniform_int(spec.min_length, spec.max_length)));
    }

    for (std::size_t w = 0; w < lengths.size(); ++w) {
        const int length = lengths[w];
        const std::string* fixed = spec.word_texts.empty() ? nullptr : &spec.word_texts[w];
        if (length < 1) throw Error(ErrorCode::InvalidArgument, "word length must be positive");
        const Font& font = fonts[static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(fonts.size()) - 1))];
        const float height = static_cast<float>(rng.uniform_int(spec.min_char_height, spec.max_char_height));

        std::vector<PlacedGlyph> glyphs;
        int pen = 0;
        for (int i = 0; i < length; ++i) {
            GlyphBitmap g;
            char c = '?';
            for (int attempt = 0;; ++attempt) {
                c = fixed ? (*fixed)[static_cast<std::size_t>(i)]
                          : cats[static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(cats.size()) - 1))];
                try {
                    g = font.render(static_cast<unsigned char>(c), height);
                    break;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::MissingGlyph || fixed || attempt >= 20) throw;
                }
            }
            glyphs.push_back({c, std::move(g.ink), pen, g.y_offset});
            pen += glyphs.back().ink.width() + static_cast<int>(rng.uniform_int(1, 4));
        }
        int top = glyphs.front().y, bottom = top, right = 0;
        for (const PlacedGlyph& g : glyphs) {
            top = std::min(top, g.y);
            bottom = std::max(bottom, g.y + g.ink.height());
            right = std::max(right, g.x + g.ink.width());
        }
        const int margin = static_cast<int>(rng.uniform_int(2, 4));
        const int word_w = right + 2 * margin;
        const int word_h = bottom - top + 2 * margin;

        std::optional<BBox> placed;
        if (word_w <= spec.width && word_h <= spec.height) {
            for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
                const int ox = static_cast<int>(rng.uniform_int(0, spec.width - word_w));
                const int oy = static_cast<int>(rng.uniform_int(0, spec.height - word_h));
                const BBox box{ox, oy, ox + word_w, oy + word_h};
                bool clear = true;
                for (const SceneWord& w : scene.words) {
                    if (!intersect(w.box, BBox{box.x_min - 2, box.y_min - 2, box.x_max + 2, box.y_max + 2}).empty()) {
                        clear = false;
                        break;
                    }
                }
                if (clear) placed = box;
            }
        }
        if (!placed) {
            if (!spec.word_lengths.empty() || fixed) {
                throw Error(ErrorCode::InvalidArgument, "could not place a word of length " + std::to_string(length));
            }
            continue;
        }

        const std::array<std::uint8_t, 3> ink = {std::uint8_t(rng.uniform_int(0, 80)),
                                                 std::uint8_t(rng.uniform_int(0, 80)),
                                                 std::uint8_t(rng.uniform_int(0, 80))};
        const int word_index = static_cast<int>(scene.words.size());
        std::string text;
        for (std::size_t i = 0; i < glyphs.size(); ++i) {
            const PlacedGlyph& g = glyphs[i];
            const int x0 = placed->x_min + margin + g.x;
            const int y0 = placed->y_min + margin + (g.y - top);
            SceneChar sc;
            sc.box = {x0, y0, x0 + g.ink.width(), y0 + g.ink.height()};
            sc.category = g.category;
            sc.word = word_index;
            sc.index = static_cast<int>(i);
            sc.mask = g.ink;
            for (int y = 0; y < g.ink.height(); ++y) {
                for (int x = 0; x < g.ink.width(); ++x) {
                    if (!g.ink.at(x, y)) continue;
                    scene.gt.at(x0 + x, y0 + y) = 1;
                    std::copy(ink.begin(), ink.end(), scene.image.pixel(x0 + x, y0 + y));
                }
            }
            scene.chars.push_back(std::move(sc));
            text.push_back(g.category);
        }
        scene.words.push_back({*placed, text});
    }
    return scene;
}

std::vector<SyntheticScene> generate_corpus(std::uint64_t seed, int count, const SceneSpec& spec,
                                            const std::vector<Font>& fonts) {
    std::vector<SyntheticScene> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "scene_%04d", i);
        out.push_back(generate_scene(seed + static_cast<std::uint64_t>(i), spec, fonts, id));
    }
    return out;
}

std::vector<Font> load_fonts(const std::filesystem::path& dir) {
    std::vector<Font> fonts;
    for (const auto& path : list_font_files(dir)) fonts.push_back(Font::load(path));
    if (fonts.empty()) throw Error(ErrorCode::FontLoadError, "no fonts found in " + dir.string());
    return fonts;
}

void save_corpus(const std::filesystem::path& dir, const std::vector<SyntheticScene>& scenes) {
    namespace fs = std::filesystem;
    std::error_code ec;
    for (const char* sub : {"images", "gt", "chars_gt"}) {
        fs::create_directories(dir / sub, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + (dir / sub).string());
    }
    DatasetManifest manifest;
    for (const SyntheticScene& s : scenes) {
        save_rgb_png(dir / "images" / (s.id + ".png"), s.image);
        save_mask_png(dir / "gt" / (s.id + ".png"), s.gt);
        write_text(dir / "chars_gt" / (s.id + ".json"), serialize_sidecar(s.id, s.char_annotations()));
        manifest.images.push_back(s.record());
    }
    save_manifest(dir / "manifest.json", manifest);
}

std::vector<SyntheticScene> load_corpus(const std::filesystem::path& dir) {
    const DatasetManifest manifest = load_manifest(dir / "manifest.json");
    std::vector<SyntheticScene> scenes;
    for (const ImageRecord& r : manifest.images) {
        SyntheticScene s;
        s.id = r.id;
        s.image = load_rgb_png(dir / "images" / r.file);
        s.gt = load_mask_png(dir / "gt" / (r.id + ".png"));
        if (s.image.width() != s.gt.width() || s.image.height() != s.gt.height()) {
            throw Error(ErrorCode::ShapeMismatch, "ground truth for " + r.id + " does not match its image");
        }
        for (const WordAnnotation& w : r.words) s.words.push_back({enclosing_bbox(w.quad), strip_spaces(w.text)});
        for (const CharAnnotation& c : load_sidecar(dir / "chars_gt" / (r.id + ".json"))) {
            s.chars.push_back({c.bbox, c.category, c.word_index, c.char_index, crop(s.gt, c.bbox)});
        }
        scenes.push_back(std::move(s));
    }
    return scenes;
}

}  // namespace glyphseg
