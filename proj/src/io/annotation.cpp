#include "glyphseg/io/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/image.hpp"

namespace glyphseg {

using nlohmann::json;

std::string strip_spaces(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

double signed_area(const Quad& q) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += cross(q[i], q[(i + 1) % 4]);
    return 0.5 * s;
}

Quad to_clockwise(const Quad& q) {
    if (signed_area(q) >= 0.0) return q;
    return {q[0], q[3], q[2], q[1]};
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

}  // namespace

bool is_simple(const Quad& q) {
    // Opposite edges must not touch.
    return !segments_cross(q[0], q[1], q[2], q[3]) && !segments_cross(q[1], q[2], q[3], q[0]);
}

BBox enclosing_bbox(const Quad& q) {
    double x0 = q[0].x, x1 = q[0].x, y0 = q[0].y, y1 = q[0].y;
    for (const Vec2& p : q) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    return {static_cast<int>(std::floor(x0)), static_cast<int>(std::floor(y0)),
            static_cast<int>(std::ceil(x1)), static_cast<int>(std::ceil(y1))};
}

Quad quad_from_box(const BBox& b) {
    return {Vec2{double(b.x_min), double(b.y_min)}, Vec2{double(b.x_max), double(b.y_min)},
            Vec2{double(b.x_max), double(b.y_max)}, Vec2{double(b.x_min), double(b.y_max)}};
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(first, last - first + 1);
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorCode::SchemaError, where + ": missing field '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::SchemaError, where + ": field '" + key + "' has the wrong type");
    }
}

bool valid_id(const std::string& id) {
    if (id.empty() || id == "." || id == "..") return false;
    return id.find_first_of("/\\") == std::string::npos;
}

WordAnnotation parse_word(const json& j, const std::string& where) {
    const auto coords = field<std::vector<double>>(j, "quad", where);
    if (coords.size() != 8) {
        throw Error(ErrorCode::SchemaError, where + ": quad needs 8 numbers, got " +
                                                std::to_string(coords.size()));
    }
    WordAnnotation word;
    for (int i = 0; i < 4; ++i) word.quad[i] = {coords[2 * i], coords[2 * i + 1]};
    word.text = trim(field<std::string>(j, "text", where));
    if (strip_spaces(word.text).empty()) {
        throw Error(ErrorCode::ValidationError, where + ": empty transcription");
    }
    if (std::abs(signed_area(word.quad)) < 1e-9 || !is_simple(word.quad)) {
        throw Error(ErrorCode::ValidationError, where + ": degenerate quad");
    }
    word.quad = to_clockwise(word.quad);
    return word;
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!root.is_object()) throw Error(ErrorCode::SchemaError, "manifest root must be an object");
    DatasetManifest manifest;
    manifest.version = field<int>(root, "version", "manifest");
    if (manifest.version != kManifestVersion) {
        throw Error(ErrorCode::SchemaError, "unsupported manifest version " + std::to_string(manifest.version));
    }
    const auto images = field<json>(root, "images", "manifest");
    if (!images.is_array()) throw Error(ErrorCode::SchemaError, "manifest: 'images' must be an array");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const json& ji = images[i];
        const std::string where = "images[" + std::to_string(i) + "]";
        ImageRecord rec;
        rec.id = field<std::string>(ji, "id", where);
        rec.file = field<std::string>(ji, "file", where);
        rec.width = field<int>(ji, "width", where);
        rec.height = field<int>(ji, "height", where);
        if (!valid_id(rec.id)) throw Error(ErrorCode::ValidationError, where + ": invalid id '" + rec.id + "'");
        if (!seen.insert(rec.id).second) {
            throw Error(ErrorCode::ValidationError, where + ": duplicate id '" + rec.id + "'");
        }
        if (rec.width < 1 || rec.height < 1) {
            throw Error(ErrorCode::ValidationError, where + ": width and height must be >= 1");
        }
        const auto words = field<json>(ji, "words", where);
        if (!words.is_array()) throw Error(ErrorCode::SchemaError, where + ": 'words' must be an array");
        for (std::size_t w = 0; w < words.size(); ++w) {
            rec.words.push_back(parse_word(words[w], where + ".words[" + std::to_string(w) + "]"));
        }
        manifest.images.push_back(std::move(rec));
    }
    return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

std::string serialize_manifest(const DatasetManifest& manifest) {
    json images = json::array();
    for (const ImageRecord& rec : manifest.images) {
        json words = json::array();
        for (const WordAnnotation& w : rec.words) {
            json quad = json::array();
            for (const Vec2& p : w.quad) {
                quad.push_back(p.x);
                quad.push_back(p.y);
            }
            words.push_back({{"quad", quad}, {"text", w.text}});
        }
        images.push_back({{"id", rec.id},
                          {"file", rec.file},
                          {"width", rec.width},
                          {"height", rec.height},
                          {"words", words}});
    }
    return json{{"version", manifest.version}, {"images", images}}.dump(1) + "\n";
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    write_text(path, serialize_manifest(manifest));
}

// ---------------------------------------------------------------------------

std::string serialize_sidecar(const std::string& id, std::vector<CharAnnotation> chars) {
    std::stable_sort(chars.begin(), chars.end(), [](const CharAnnotation& a, const CharAnnotation& b) {
        if (a.word_index != b.word_index) return a.word_index < b.word_index;
        return a.char_index < b.char_index;
    });
    json list = json::array();
    for (const CharAnnotation& c : chars) {
        list.push_back({{"bbox", {c.bbox.x_min, c.bbox.y_min, c.bbox.x_max, c.bbox.y_max}},
                        {"category", std::string(1, c.category)},
                        {"word", c.word_index},
                        {"index", c.char_index}});
    }
    return json{{"id", id}, {"chars", list}}.dump(1) + "\n";
}

std::vector<CharAnnotation> load_sidecar(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    json root;
    try {
        root = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    std::vector<CharAnnotation> out;
    for (const json& jc : field<json>(root, "chars", path.string())) {
        const auto box = field<std::vector<int>>(jc, "bbox", path.string());
        const auto cat = field<std::string>(jc, "category", path.string());
        if (box.size() != 4 || cat.size() != 1) {
            throw Error(ErrorCode::SchemaError, path.string() + ": malformed character entry");
        }
        out.push_back({{box[0], box[1], box[2], box[3]}, cat[0], field<int>(jc, "word", path.string()),
                       field<int>(jc, "index", path.string())});
    }
    return out;
}

ExportEntry export_one(const ImageResult& result, const std::filesystem::path& out_dir) {
    if (!valid_id(result.id)) throw Error(ErrorCode::ValidationError, "invalid image id '" + result.id + "'");
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "masks", ec);
    std::filesystem::create_directories(out_dir / "chars", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directories under " + out_dir.string());
    ExportEntry entry{result.id, "masks/" + result.id + ".png", "chars/" + result.id + ".json"};
    save_mask_png(out_dir / entry.mask_path, result.mask);
    write_text(out_dir / entry.chars_path, serialize_sidecar(result.id, result.chars));
    return entry;
}

void write_index(const ExportIndex& index, const std::filesystem::path& out_dir) {
    json images = json::array();
    for (const ExportEntry& e : index.entries) {
        images.push_back({{"id", e.id}, {"mask", e.mask_path}, {"chars", e.chars_path}});
    }
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "index.json", json{{"version", 1}, {"images", images}}.dump(1) + "\n");
}

ExportIndex export_masks(const std::vector<ImageResult>& results, const std::filesystem::path& out_dir) {
    ExportIndex index;
    for (const ImageResult& r : results) index.entries.push_back(export_one(r, out_dir));
    write_index(index, out_dir);
    return index;
}

ExportIndex load_index(const std::filesystem::path& out_dir) {
    const auto path = out_dir / "index.json";
    const auto bytes = read_file(path);
    json root;
    try {
        root = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    ExportIndex index;
    for (const json& e : field<json>(root, "images", path.string())) {
        index.entries.push_back({field<std::string>(e, "id", path.string()),
                                 field<std::string>(e, "mask", path.string()),
                                 field<std::string>(e, "chars", path.string())});
    }
    return index;
}

}  // namespace glyphseg
