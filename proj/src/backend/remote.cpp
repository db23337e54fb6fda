#include "glyphseg/backend/remote.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "glyphseg/error.hpp"

namespace glyphseg {

namespace {

template <typename T>
Raster<T> sub_raster(const Raster<T>& src, Point origin, int width, int height) {
    Raster<T> out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) out.at(x, y) = src.at(origin.x + x, origin.y + y);
    }
    return out;
}

const RgbImage& pixels_of(const ImageRef& image) {
    if (image.pixels == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "remote backend needs the pixels of " + image.id);
    }
    return *image.pixels;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    const auto scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos || config_.endpoint.compare(0, scheme, "http") != 0) {
        throw Error(ErrorCode::ConfigError, "endpoint must look like http://host:port, got '" + config_.endpoint + "'");
    }
    const auto slash = config_.endpoint.find('/', scheme + 3);
    origin_ = config_.endpoint.substr(0, slash);
    if (slash != std::string::npos) {
        prefix_ = config_.endpoint.substr(slash);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
    if (origin_.size() <= scheme + 3) throw Error(ErrorCode::ConfigError, "endpoint has no host");
    if (config_.retries < 0 || config_.max_in_flight < 1 || config_.timeout_seconds <= 0.0) {
        throw Error(ErrorCode::ConfigError, "retries, max_in_flight and timeout must be positive");
    }
}

std::string RemoteBackend::call(const std::string& path, const std::string* body) {
    httplib::Client client(origin_);
    const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
    client.set_connection_timeout(sec.count(), usec.count());
    client.set_read_timeout(sec.count(), usec.count());
    client.set_write_timeout(sec.count(), usec.count());

    const std::string url = prefix_ + path;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0 && !config_.backoff_seconds.empty()) {
            const std::size_t i = std::min<std::size_t>(attempt - 1, config_.backoff_seconds.size() - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(config_.backoff_seconds[i]));
        }
        auto res = body ? client.Post(url, *body, "application/json") : client.Get(url);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        throw Error(ErrorCode::ProtocolError, path + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    throw Error(ErrorCode::BackendUnavailable, origin_ + url + " failed after " +
                                                   std::to_string(config_.retries + 1) + " attempts: " + last_error);
}

SegmentResponse RemoteBackend::segment(const ImageRef& image, const SegmentRequest& request) {
    const RgbImage& pixels = pixels_of(image);
    const BBox crop_box = clamp_to(pad(request.box, config_.crop_margin), pixels.width(), pixels.height());
    if (!crop_box.contains(request.box)) throw Error(ErrorCode::InvalidArgument, "segment box outside the image");
    const Point origin{crop_box.x_min, crop_box.y_min};
    auto shift = [&](const std::vector<Point>& pts) {
        std::vector<Point> out;
        for (Point p : pts) out.push_back({p.x - origin.x, p.y - origin.y});
        return out;
    };
    WireSegmentRequest wire;
    wire.image = pixels.crop(crop_box);
    wire.box = {request.box.x_min - origin.x, request.box.y_min - origin.y, request.box.x_max - origin.x,
                request.box.y_max - origin.y};
    wire.positives = shift(request.positives);
    wire.negatives = shift(request.negatives);
    const std::string body = encode_segment_request(wire);

    SegmentResponse full = decode_segment_response(call("/segment", &body));
    validate_response(full, BBox{0, 0, crop_box.width(), crop_box.height()});
    SegmentResponse out;
    const Point inner{wire.box.x_min, wire.box.y_min};
    out.mask = sub_raster(full.mask, inner, request.box.width(), request.box.height());
    out.logits = sub_raster(full.logits, inner, request.box.width(), request.box.height());
    out.score = full.score;
    return out;
}

std::vector<DetectedBox> RemoteBackend::detect_chars(const ImageRef& image, const BBox& word_box) {
    const RgbImage& pixels = pixels_of(image);
    const BBox crop_box = clamp_to(pad(word_box, config_.crop_margin), pixels.width(), pixels.height());
    if (crop_box.empty()) return {};
    const std::string body = encode_image_request(pixels.crop(crop_box));
    std::vector<DetectedBox> out;
    for (DetectedBox d : decode_detect_response(call("/detect_chars", &body))) {
        d.bbox = intersect({d.bbox.x_min + crop_box.x_min, d.bbox.y_min + crop_box.y_min,
                            d.bbox.x_max + crop_box.x_min, d.bbox.y_max + crop_box.y_min},
                           word_box);
        if (!d.bbox.empty()) out.push_back(d);
    }
    return out;
}

RecognitionResult RemoteBackend::recognize(const ImageRef& image, const BBox& crop) {
    const RgbImage& pixels = pixels_of(image);
    const BBox box = clamp_to(crop, pixels.width(), pixels.height());
    if (box.empty()) return {};
    const std::string body = encode_image_request(pixels.crop(box));
    return decode_recognize_response(call("/recognize", &body));
}

HealthStatus RemoteBackend::health() { return decode_health(call("/health", nullptr)); }

}  // namespace glyphseg
