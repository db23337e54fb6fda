#include "glyphseg/backend/protocol.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <openssl/evp.h>

#include <json.hpp>

#include "glyphseg/error.hpp"

namespace glyphseg {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ProtocolError, what); }

json parse_body(const std::string& body) {
    try {
        json j = json::parse(body);
        if (!j.is_object()) bad("body is not a JSON object");
        return j;
    } catch (const json::exception& e) {
        bad(std::string("body is not valid JSON: ") + e.what());
    }
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) bad(std::string("missing field '") + name + "'");
    return *it;
}

const std::string& string_field(const json& j, const char* name) {
    const json& v = field(j, name);
    if (!v.is_string()) bad(std::string("field '") + name + "' is not a string");
    return v.get_ref<const std::string&>();
}

double number(const json& v, const char* what) {
    if (!v.is_number()) bad(std::string(what) + " is not a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(std::string(what) + " is not finite");
    return d;
}

int integer(const json& v, const char* what) {
    const double d = number(v, what);
    if (d != std::floor(d) || std::abs(d) > 1e9) bad(std::string(what) + " is not an integer");
    return static_cast<int>(d);
}

const json& array_field(const json& j, const char* name) {
    const json& v = field(j, name);
    if (!v.is_array()) bad(std::string("field '") + name + "' is not an array");
    return v;
}

json points_json(const std::vector<Point>& pts) {
    json a = json::array();
    for (Point p : pts) a.push_back({p.x, p.y});
    return a;
}

std::vector<Point> points_from(const json& a, const char* name) {
    std::vector<Point> out;
    for (const json& p : a) {
        if (!p.is_array() || p.size() != 2) bad(std::string(name) + " entries must be [x, y]");
        out.push_back({integer(p[0], name), integer(p[1], name)});
    }
    return out;
}

RgbImage image_from(const json& j) {
    const auto bytes = base64_decode(string_field(j, "image_b64"));
    try {
        return decode_png_rgb(bytes);
    } catch (const Error& e) {
        bad(std::string("image_b64 is not a PNG: ") + e.what());
    }
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) bad("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) bad("invalid base64");
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=') ++padding;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

std::vector<std::uint8_t> encode_logits(const ScoreMap& logits) {
    std::vector<std::uint8_t> out;
    out.reserve(logits.size() * 4);
    for (float v : logits.pixels()) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    return out;
}

ScoreMap decode_logits(std::span<const std::uint8_t> bytes, int width, int height) {
    if (width < 1 || height < 1) bad("logit shape must be positive");
    if (bytes.size() != std::size_t(width) * std::size_t(height) * 4) {
        bad("logits hold " + std::to_string(bytes.size()) + " bytes, shape needs " +
            std::to_string(std::size_t(width) * std::size_t(height) * 4));
    }
    ScoreMap out(width, height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= std::uint32_t(bytes[4 * i + b]) << (8 * b);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

std::string encode_segment_request(const WireSegmentRequest& r) {
    json j;
    j["image_b64"] = base64_encode(encode_png(r.image));
    j["box"] = {r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max};
    j["pos_points"] = points_json(r.positives);
    j["neg_points"] = points_json(r.negatives);
    return j.dump();
}

WireSegmentRequest decode_segment_request(const std::string& body) {
    const json j = parse_body(body);
    WireSegmentRequest r;
    r.image = image_from(j);
    const json& box = array_field(j, "box");
    if (box.size() != 4) bad("box must have 4 numbers");
    r.box = {integer(box[0], "box"), integer(box[1], "box"), integer(box[2], "box"), integer(box[3], "box")};
    if (r.box.empty()) bad("box is empty");
    r.positives = points_from(array_field(j, "pos_points"), "pos_points");
    r.negatives = points_from(array_field(j, "neg_points"), "neg_points");
    return r;
}

std::string encode_segment_response(const SegmentResponse& r) {
    json j;
    j["mask_b64"] = base64_encode(encode_png(r.mask));
    j["logits_b64"] = base64_encode(encode_logits(r.logits));
    j["shape"] = {r.logits.height(), r.logits.width()};
    j["score"] = r.score;
    return j.dump();
}

SegmentResponse decode_segment_response(const std::string& body) {
    const json j = parse_body(body);
    const json& shape = array_field(j, "shape");
    if (shape.size() != 2) bad("shape must be [h, w]");
    const int h = integer(shape[0], "shape"), w = integer(shape[1], "shape");
    SegmentResponse r;
    r.logits = decode_logits(base64_decode(string_field(j, "logits_b64")), w, h);
    try {
        r.mask = decode_png_mask(base64_decode(string_field(j, "mask_b64")));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ProtocolError) throw;
        bad(std::string("mask_b64 is not a PNG: ") + e.what());
    }
    r.score = number(field(j, "score"), "score");
    validate_response(r, BBox{0, 0, w, h});
    return r;
}

std::string encode_image_request(const RgbImage& image) {
    json j;
    j["image_b64"] = base64_encode(encode_png(image));
    return j.dump();
}

RgbImage decode_image_request(const std::string& body) { return image_from(parse_body(body)); }

std::string encode_detect_response(const std::vector<DetectedBox>& boxes) {
    json a = json::array();
    for (const DetectedBox& b : boxes) a.push_back({b.bbox.x_min, b.bbox.y_min, b.bbox.x_max, b.bbox.y_max, b.confidence});
    return json{{"boxes", a}}.dump();
}

std::vector<DetectedBox> decode_detect_response(const std::string& body) {
    const json j = parse_body(body);
    std::vector<DetectedBox> out;
    for (const json& b : array_field(j, "boxes")) {
        if (!b.is_array() || b.size() != 5) bad("boxes entries must be [x1, y1, x2, y2, conf]");
        DetectedBox d;
        d.bbox = {static_cast<int>(std::floor(number(b[0], "box"))), static_cast<int>(std::floor(number(b[1], "box"))),
                  static_cast<int>(std::ceil(number(b[2], "box"))), static_cast<int>(std::ceil(number(b[3], "box")))};
        d.confidence = number(b[4], "confidence");
        if (d.bbox.empty()) bad("detected box is empty");
        if (d.confidence < 0.0 || d.confidence > 1.0) bad("confidence outside [0, 1]");
        out.push_back(d);
    }
    return out;
}

std::string encode_recognize_response(const RecognitionResult& r) {
    return json{{"text", r.text}, {"confidences", r.confidences}}.dump();
}

RecognitionResult decode_recognize_response(const std::string& body) {
    const json j = parse_body(body);
    RecognitionResult r;
    r.text = string_field(j, "text");
    for (const json& c : array_field(j, "confidences")) {
        const double v = number(c, "confidence");
        if (v < 0.0 || v > 1.0) bad("confidence outside [0, 1]");
        r.confidences.push_back(v);
    }
    if (r.confidences.size() != r.text.size()) bad("confidences do not match text length");
    return r;
}

std::string encode_health(const HealthStatus& h) {
    return json{{"status", h.status}, {"models", h.models}}.dump();
}

HealthStatus decode_health(const std::string& body) {
    const json j = parse_body(body);
    HealthStatus h;
    h.status = string_field(j, "status");
    if (auto it = j.find("models"); it != j.end()) {
        if (!it->is_object()) bad("models is not an object");
        for (const auto& [role, id] : it->items()) {
            if (!id.is_string()) bad("model identifier is not a string");
            h.models[role] = id.get<std::string>();
        }
    }
    return h;
}

}  // namespace glyphseg
