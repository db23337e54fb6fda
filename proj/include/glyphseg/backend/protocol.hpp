#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glyphseg/backend/interfaces.hpp"

// JSON bodies of the model service endpoints. Every decoder throws
// ProtocolError on malformed input; nothing is repaired silently.
//
//   POST /segment       {image_b64, box:[x1,y1,x2,y2], pos_points:[[x,y]..], neg_points:[[x,y]..]}
//                    -> {mask_b64, logits_b64, shape:[h,w], score}
//   POST /detect_chars  {image_b64} -> {boxes:[[x1,y1,x2,y2,conf]..]}
//   POST /recognize     {image_b64} -> {text, confidences:[..]}
//   GET  /health        -> {status, models:{role: identifier}}
//
// Images are PNG (RGB crops, 8-bit gray masks), logits raw little-endian
// float32 in row-major order. Coordinates are in the crop frame.

namespace glyphseg {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::vector<std::uint8_t> encode_logits(const ScoreMap& logits);
ScoreMap decode_logits(std::span<const std::uint8_t> bytes, int width, int height);

struct WireSegmentRequest {
    RgbImage image;
    BBox box;
    std::vector<Point> positives;
    std::vector<Point> negatives;
};

std::string encode_segment_request(const WireSegmentRequest& request);
WireSegmentRequest decode_segment_request(const std::string& body);
std::string encode_segment_response(const SegmentResponse& response);
/// Also checks that mask and logits agree in shape and mask == (logits > 0).
SegmentResponse decode_segment_response(const std::string& body);

std::string encode_image_request(const RgbImage& image);
RgbImage decode_image_request(const std::string& body);

std::string encode_detect_response(const std::vector<DetectedBox>& boxes);
std::vector<DetectedBox> decode_detect_response(const std::string& body);

std::string encode_recognize_response(const RecognitionResult& result);
RecognitionResult decode_recognize_response(const std::string& body);

struct HealthStatus {
    std::string status;
    std::map<std::string, std::string> models;

    friend bool operator==(const HealthStatus&, const HealthStatus&) = default;
};

std::string encode_health(const HealthStatus& health);
HealthStatus decode_health(const std::string& body);

}  // namespace glyphseg
