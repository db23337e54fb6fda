#pragma once

#include <string>
#include <vector>

#include "glyphseg/raster/geometry.hpp"
#include "glyphseg/raster/image.hpp"
#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

/// What a backend gets to see of an image: its id (oracle lookups) and its
/// pixels (remote crops). `pixels` may be null for id-only backends.
struct ImageRef {
    std::string id;
    const RgbImage* pixels = nullptr;
    int width = 0;
    int height = 0;
};

struct DetectedBox {
    BBox bbox;  // image frame
    double confidence = 1.0;

    friend bool operator==(const DetectedBox&, const DetectedBox&) = default;
};

struct RecognitionResult {
    std::string text;
    std::vector<double> confidences;  // one per character of text

    friend bool operator==(const RecognitionResult&, const RecognitionResult&) = default;
};

/// Box and point prompts, all in the image frame. Points lie inside box.
struct SegmentRequest {
    BBox box;
    std::vector<Point> positives;
    std::vector<Point> negatives;
};

/// Mask and logits cover exactly the request box; mask == (logits > 0).
struct SegmentResponse {
    BitMask mask;
    ScoreMap logits;
    double score = 0.0;
};

/// Throws ProtocolError unless the response matches `box` in size and the
/// mask equals the positive part of the logits.
void validate_response(const SegmentResponse& response, const BBox& box);

// A capacity of 0 means the backend is safe for any number of concurrent
// calls; otherwise callers keep at most that many requests in flight.

class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual SegmentResponse segment(const ImageRef& image, const SegmentRequest& request) = 0;
    virtual int max_in_flight() const { return 0; }
};

class CharDetector {
public:
    virtual ~CharDetector() = default;
    /// Character boxes inside `word_box`, image frame, any order.
    virtual std::vector<DetectedBox> detect_chars(const ImageRef& image, const BBox& word_box) = 0;
    virtual int max_in_flight() const { return 0; }
};

class Recognizer {
public:
    virtual ~Recognizer() = default;
    /// Reads the text inside `crop` (image frame, already padded by the caller).
    virtual RecognitionResult recognize(const ImageRef& image, const BBox& crop) = 0;
    virtual int max_in_flight() const { return 0; }
};

}  // namespace glyphseg
