#include "glyphseg/backend/service.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include <httplib.h>
#include <json.hpp>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/morphology.hpp"

namespace glyphseg {

namespace {

int luminance(const std::uint8_t* p) { return (299 * p[0] + 587 * p[1] + 114 * p[2] + 500) / 1000; }

// Dark pixels inside `box` under Otsu's threshold; all-off for a flat region.
BitMask dark_pixels(const RgbImage& image, const BBox& box) {
    std::array<std::int64_t, 256> hist{};
    for (int y = box.y_min; y < box.y_max; ++y) {
        for (int x = box.x_min; x < box.x_max; ++x) ++hist[luminance(image.pixel(x, y))];
    }
    const std::int64_t total = box.area();
    double sum = 0.0;
    for (int v = 0; v < 256; ++v) sum += double(v) * double(hist[v]);
    double best = 0.0, sum_low = 0.0;
    std::int64_t low = 0;
    int threshold = -1;
    for (int t = 0; t < 255; ++t) {
        low += hist[t];
        sum_low += double(t) * double(hist[t]);
        if (low == 0 || low == total) continue;
        const double m0 = sum_low / double(low), m1 = (sum - sum_low) / double(total - low);
        const double between = double(low) * double(total - low) * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            threshold = t;
        }
    }
    BitMask out(image.width(), image.height(), 0);
    if (threshold < 0) return out;
    for (int y = box.y_min; y < box.y_max; ++y) {
        for (int x = box.x_min; x < box.x_max; ++x) out.at(x, y) = luminance(image.pixel(x, y)) <= threshold;
    }
    return out;
}

struct Oversize {};

}  // namespace

SegmentResponse threshold_segment(const WireSegmentRequest& request) {
    const RgbImage& image = request.image;
    const BBox box = intersect(request.box, image.bounds());
    if (box != request.box) throw Error(ErrorCode::ProtocolError, "box lies outside the image");
    for (const auto* pts : {&request.positives, &request.negatives}) {
        for (Point p : *pts) {
            if (!box.contains(p)) throw Error(ErrorCode::ProtocolError, "prompt point outside the box");
        }
    }
    BitMask mask = dark_pixels(image, box);
    const Components parts = connected_components(mask, Connectivity::Eight);
    std::vector<char> keep(parts.items.size() + 1, request.positives.empty() ? 1 : 0);
    keep[0] = 0;
    for (Point p : request.positives) keep[parts.labels.at(p)] = parts.labels.at(p) > 0;
    for (Point p : request.negatives) keep[parts.labels.at(p)] = 0;
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = keep[parts.labels[k]];

    SegmentResponse r;
    r.logits = signed_distance(mask);
    r.score = count(mask) > 0 ? 1.0 : 0.0;
    r.mask = std::move(mask);
    return r;
}

std::vector<DetectedBox> ink_components(const RgbImage& image) {
    const Components parts = connected_components(dark_pixels(image, image.bounds()), Connectivity::Eight);
    std::vector<BBox> boxes;
    for (const auto& c : parts.items) {
        if (c.area >= 2) boxes.push_back(c.box);
    }
    // Join boxes sharing most of the narrower one's columns (i, j, accents).
    for (bool joined = true; joined;) {
        joined = false;
        for (std::size_t a = 0; a < boxes.size() && !joined; ++a) {
            for (std::size_t b = a + 1; b < boxes.size() && !joined; ++b) {
                const int overlap = std::min(boxes[a].x_max, boxes[b].x_max) - std::max(boxes[a].x_min, boxes[b].x_min);
                if (2 * overlap >= std::min(boxes[a].width(), boxes[b].width())) {
                    boxes[a] = unite(boxes[a], boxes[b]);
                    boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(b));
                    joined = true;
                }
            }
        }
    }
    std::sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
        return std::tie(a.x_min, a.y_min, a.x_max, a.y_max) < std::tie(b.x_min, b.y_min, b.x_max, b.y_max);
    });
    std::vector<DetectedBox> out;
    for (const BBox& b : boxes) out.push_back({b, 1.0});
    return out;
}

ReferenceService::ReferenceService(ServiceConfig config) : config_(std::move(config)) {
    if (config_.port < 0 || config_.port > 65535) throw Error(ErrorCode::ConfigError, "port out of range");
    if (config_.max_request_pixels <= 0) throw Error(ErrorCode::ConfigError, "max request pixels must be positive");
}

ReferenceService::~ReferenceService() { stop(); }

ServiceReply ReferenceService::handle(const std::string& method, const std::string& path,
                                      const std::string& body) const {
    const bool post = method == "POST";
    auto wrong_method = [&] { return ServiceReply{405, R"({"error": "method not allowed"})"}; };
    auto checked = [&](const RgbImage& image) -> const RgbImage& {
        if (std::int64_t(image.width()) * image.height() > config_.max_request_pixels) throw Oversize{};
        return image;
    };
    try {
        if (path == "/health") {
            if (method != "GET") return wrong_method();
            return {200, encode_health({"ok", {{"segmenter", "otsu-threshold"},
                                               {"detector", "ink-components"},
                                               {"recognizer", "none"}}})};
        }
        if (path == "/segment") {
            if (!post) return wrong_method();
            const WireSegmentRequest request = decode_segment_request(body);
            checked(request.image);
            return {200, encode_segment_response(threshold_segment(request))};
        }
        if (path == "/detect_chars") {
            if (!post) return wrong_method();
            return {200, encode_detect_response(ink_components(checked(decode_image_request(body))))};
        }
        if (path == "/recognize") {
            if (!post) return wrong_method();
            checked(decode_image_request(body));
            return {200, encode_recognize_response({})};
        }
        return {404, R"({"error": "no such endpoint"})"};
    } catch (const Oversize&) {
        return {413, R"({"error": "image exceeds the request pixel limit"})"};
    } catch (const Error& e) {
        return {400, nlohmann::json{{"error", e.what()}}.dump()};
    }
}

void ReferenceService::install_routes() {
    server_ = std::make_unique<httplib::Server>();
    // Catch-all routes: the pre-routing hook would run before the body is read.
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const ServiceReply reply = handle(req.method, req.path, req.body);
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    server_->Get(".*", forward);
    server_->Post(".*", forward);
    server_->Put(".*", forward);
    server_->Delete(".*", forward);
}

int ReferenceService::start() {
    install_routes();
    int port = config_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(config_.host);
    } else if (!server_->bind_to_port(config_.host, port)) {
        port = -1;
    }
    if (port < 0) throw Error(ErrorCode::ConfigError, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void ReferenceService::run() {
    install_routes();
    if (!server_->listen(config_.host, config_.port)) {
        throw Error(ErrorCode::ConfigError, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
    }
}

void ReferenceService::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace glyphseg
