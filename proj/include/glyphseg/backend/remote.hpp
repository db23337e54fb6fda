#pragma once

#include <string>
#include <vector>

#include "glyphseg/backend/interfaces.hpp"
#include "glyphseg/backend/protocol.hpp"

namespace glyphseg {

struct RemoteConfig {
    std::string endpoint;  // http://host:port with an optional path prefix
    int max_in_flight = 4;
    int retries = 3;       // after the first attempt
    std::vector<double> backoff_seconds = {0.5, 1.0, 2.0};
    double timeout_seconds = 30.0;
    double crop_margin = 0.1;  // context added around segment and detect boxes
};

/// Client for the model service. Connection failures, timeouts and 5xx/429
/// answers are retried with the configured backoff, then surface as
/// BackendUnavailable. Any other non-200 answer or malformed body is a
/// ProtocolError. Safe to call from several threads.
class RemoteBackend final : public Segmenter, public CharDetector, public Recognizer {
public:
    explicit RemoteBackend(RemoteConfig config);

    SegmentResponse segment(const ImageRef& image, const SegmentRequest& request) override;
    std::vector<DetectedBox> detect_chars(const ImageRef& image, const BBox& word_box) override;
    RecognitionResult recognize(const ImageRef& image, const BBox& crop) override;
    int max_in_flight() const override { return config_.max_in_flight; }

    HealthStatus health();

private:
    std::string call(const std::string& path, const std::string* body);

    RemoteConfig config_;
    std::string origin_;  // scheme://host:port
    std::string prefix_;  // path prefix without trailing slash
};

}  // namespace glyphseg
