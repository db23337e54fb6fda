#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "glyphseg/backend/interfaces.hpp"
#include "glyphseg/backend/scene.hpp"

namespace glyphseg {

/// Failure modes imitated by the oracle segmenter.
struct OracleCorruption {
    bool fill_holes = false;  // enclosed counters come back as foreground
    bool truncate = false;    // trailing part of the mask is lost
    double truncate_fraction = 0.4;
    bool bridge = false;      // a box holding several characters returns one blob
};

struct OracleConfig {
    OracleCorruption corruption;

    // Detector: merge adjacent character pairs (i, i+1). Explicit merges are
    // keyed by (image id, word index); merge_rate adds seeded random ones.
    std::map<std::pair<std::string, int>, std::vector<std::pair<int, int>>> merges;
    double merge_rate = 0.0;
    std::uint64_t seed = 0;
    int noise_boxes = 0;  // extra boxes per word at noise_confidence
    double noise_confidence = 0.1;

    // Recognizer error injection.
    double empty_rate = 0.0;
    double confidence_scale = 1.0;
};

/// Deterministic backend answering from synthetic ground truth.
///
/// segment: the mask starts as ground truth inside the box. With bridge on
/// and two or more character centres in the box, every row (column for tall
/// boxes) is filled between its outermost ink pixels. fill_holes adds the
/// counters of every character touching the box. truncate drops the last
/// truncate_fraction of the mask's extent along the box's longer side. A
/// positive on ink missing from the mask restores that ink's 8-connected
/// ground-truth component; a negative inside a counter removes the counter.
/// Logits are the chessboard distance inside the mask and its negation
/// outside, so mask == (logits > 0).
///
/// detect_chars: ground-truth boxes of the word best overlapping the box,
/// with the configured merges applied. recognize: the characters whose box
/// is more than half covered by the crop, confidence 1 (times the scale).
class OracleBackend final : public Segmenter, public CharDetector, public Recognizer {
public:
    explicit OracleBackend(std::vector<SyntheticScene> scenes, OracleConfig config = {});
    ~OracleBackend() override;

    SegmentResponse segment(const ImageRef& image, const SegmentRequest& request) override;
    std::vector<DetectedBox> detect_chars(const ImageRef& image, const BBox& word_box) override;
    RecognitionResult recognize(const ImageRef& image, const BBox& crop) override;

    const SyntheticScene& scene(const std::string& id) const;
    const OracleConfig& config() const { return config_; }

    /// Which adjacent pairs (first index) of a word the detector merges.
    std::vector<int> merged_pairs(const std::string& image_id, int word_index) const;

private:
    struct Entry;
    const Entry& entry(const std::string& id) const;

    OracleConfig config_;
    std::map<std::string, std::unique_ptr<Entry>> entries_;
};

}  // namespace glyphseg
