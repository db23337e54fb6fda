#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glyphseg/raster/geometry.hpp"
#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

inline constexpr int kManifestVersion = 1;

struct WordAnnotation {
    Quad quad;         // clockwise in image coordinates (y down)
    std::string text;  // trimmed transcription, may contain inner spaces
};

struct CharAnnotation {
    BBox bbox;
    char category = '?';
    int word_index = 0;
    int char_index = 0;  // position in the space-stripped transcription

    friend bool operator==(const CharAnnotation&, const CharAnnotation&) = default;
};

struct ImageRecord {
    std::string id;
    std::string file;  // relative to the image directory
    int width = 0;
    int height = 0;
    std::vector<WordAnnotation> words;
};

struct DatasetManifest {
    int version = kManifestVersion;
    std::vector<ImageRecord> images;
};

/// Transcription with every space removed; these are the characters that
/// receive boxes and masks.
std::string strip_spaces(const std::string& text);

/// Shoelace sum with y pointing down: positive means clockwise on screen.
double signed_area(const Quad& quad);

/// Returns the quad in clockwise order, keeping the first vertex.
Quad to_clockwise(const Quad& quad);

bool is_simple(const Quad& quad);

/// Tight integer box around the quad (floor of minima, ceil of maxima).
/// Not clamped; callers clamp to the image.
BBox enclosing_bbox(const Quad& quad);

Quad quad_from_box(const BBox& box);

DatasetManifest parse_manifest(const std::string& text);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// ---------------------------------------------------------------------------
// Export

struct ImageResult {
    std::string id;
    BitMask mask;
    std::vector<CharAnnotation> chars;
};

struct ExportEntry {
    std::string id;
    std::string mask_path;  // relative to the output directory
    std::string chars_path;
};

struct ExportIndex {
    std::vector<ExportEntry> entries;
};

/// Writes masks/<id>.png, chars/<id>.json and index.json under out_dir.
/// Character lists are written sorted by (word_index, char_index).
ExportIndex export_masks(const std::vector<ImageResult>& results, const std::filesystem::path& out_dir);

/// Writes the files for a single image; used by concurrent workers.
ExportEntry export_one(const ImageResult& result, const std::filesystem::path& out_dir);
void write_index(const ExportIndex& index, const std::filesystem::path& out_dir);

ExportIndex load_index(const std::filesystem::path& out_dir);
std::vector<CharAnnotation> load_sidecar(const std::filesystem::path& path);
std::string serialize_sidecar(const std::string& id, std::vector<CharAnnotation> chars);

}  // namespace glyphseg
