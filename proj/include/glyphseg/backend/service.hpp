#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "glyphseg/backend/protocol.hpp"

namespace httplib {
class Server;
}

namespace glyphseg {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::int64_t max_request_pixels = 4'000'000;
};

struct ServiceReply {
    int status = 200;
    std::string body;
};

/// The model service protocol served by classical stand-in models, for
/// protocol tests and dry runs without the neural service:
///   segment     ink (pixels darker than the box's Otsu threshold) inside
///               the box; with positives only the ink components holding
///               one, minus any component holding a negative
///   detect      bounding boxes of 8-connected ink components, stacked
///               parts (dots, accents) joined with the part below
///   recognize   always an empty reading
/// Replies 400 on malformed bodies, 404/405 on unknown routes and 413 when
/// the image exceeds max_request_pixels. Identical requests give identical
/// bytes.
class ReferenceService {
public:
    explicit ReferenceService(ServiceConfig config);
    ~ReferenceService();

    ServiceReply handle(const std::string& method, const std::string& path, const std::string& body) const;

    /// Binds and serves on a background thread; returns the bound port.
    int start();
    /// Serves on the calling thread until stop() (from another thread).
    void run();
    void stop();

private:
    void install_routes();

    ServiceConfig config_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

SegmentResponse threshold_segment(const WireSegmentRequest& request);
std::vector<DetectedBox> ink_components(const RgbImage& image);

}  // namespace glyphseg
