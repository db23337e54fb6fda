#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glyphseg/glyph/font.hpp"
#include "glyphseg/io/annotation.hpp"
#include "glyphseg/raster/image.hpp"

namespace glyphseg {

struct SceneChar {
    BBox box;  // tight ink box, image frame
    char category = '?';
    int word = 0;
    int index = 0;
    BitMask mask;  // ink over `box`
};

struct SceneWord {
    BBox box;  // char boxes plus a small margin
    std::string text;
};

/// A rendered image with exact per-character ground truth. Character boxes
/// are pairwise disjoint, so the masks are too, and their union is `gt`.
struct SyntheticScene {
    std::string id;
    std::uint64_t seed = 0;
    RgbImage image;
    BitMask gt;
    std::vector<SceneWord> words;
    std::vector<SceneChar> chars;  // grouped by word, then reading order

    ImageRecord record() const;
    std::vector<CharAnnotation> char_annotations() const;
};

struct SceneSpec {
    int width = 640;
    int height = 480;
    int min_words = 3;
    int max_words = 6;
    int min_length = 2;
    int max_length = 7;
    std::vector<int> word_lengths;  // when set, overrides the word count and length ranges
    std::vector<std::string> word_texts;  // when set, exact words; overrides word_lengths
    int min_char_height = 24;
    int max_char_height = 56;
    std::string categories = "A-Za-z0-9";
};

/// Renders random words in random fonts at random non-overlapping places.
/// The same seed, spec and font list give a byte-identical scene. Words that
/// cannot be placed after repeated attempts are dropped, except when
/// `word_lengths` or `word_texts` is given, in which case InvalidArgument is
/// thrown.
SyntheticScene generate_scene(std::uint64_t seed, const SceneSpec& spec, const std::vector<Font>& fonts,
                              const std::string& id);

/// Scene `i` of a corpus uses seed `seed + i` and id "scene_<i>" (4 digits).
std::vector<SyntheticScene> generate_corpus(std::uint64_t seed, int count, const SceneSpec& spec,
                                            const std::vector<Font>& fonts);

std::vector<Font> load_fonts(const std::filesystem::path& dir);

/// Writes images/<id>.png, gt/<id>.png, chars_gt/<id>.json and manifest.json.
void save_corpus(const std::filesystem::path& dir, const std::vector<SyntheticScene>& scenes);

/// Rebuilds scenes from a directory written by save_corpus. Character masks
/// are recovered as the ground truth inside each character box.
std::vector<SyntheticScene> load_corpus(const std::filesystem::path& dir);

}  // namespace glyphseg
