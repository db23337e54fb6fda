#include <gtest/gtest.h>

#include <atomic>
#include <bit>
#include <cstring>
#include <thread>

#include <httplib.h>

#include "glyphseg/backend/remote.hpp"
#include "glyphseg/backend/service.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "../support/oracles.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

std::string fixture(const std::string& name) {
    const auto bytes = read_file(std::filesystem::path(GLYPHSEG_TEST_FIXTURES) / "protocol" / name);
    return {bytes.begin(), bytes.end()};
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

// httplib server on a free port, torn down with the test.
class Stub {
public:
    Stub() = default;
    ~Stub() {
        server.stop();
        if (thread_.joinable()) thread_.join();
    }
    std::string start() {
        const int port = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
        return "http://127.0.0.1:" + std::to_string(port);
    }
    httplib::Server server;

private:
    std::thread thread_;
};

RgbImage white(int w, int h) { return RgbImage(w, h, {255, 255, 255}); }

void paint(RgbImage& img, const BBox& b, std::array<std::uint8_t, 3> c) {
    for (int y = b.y_min; y < b.y_max; ++y) {
        for (int x = b.x_min; x < b.x_max; ++x) std::memcpy(img.pixel(x, y), c.data(), 3);
    }
}

RemoteConfig quick(const std::string& endpoint) {
    RemoteConfig c;
    c.endpoint = endpoint;
    c.backoff_seconds = {0.01};
    c.timeout_seconds = 5.0;
    return c;
}

}  // namespace

TEST(Base64, KnownVectorsAndRoundTrip) {
    const std::pair<const char*, const char*> vectors[] = {
        {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foobar", "Zm9vYmFy"}};
    for (auto [plain, coded] : vectors) {
        EXPECT_EQ(base64_encode(as_bytes(plain)), coded);
        const auto back = base64_decode(coded);
        EXPECT_EQ(std::string(back.begin(), back.end()), plain);
    }
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(rng.uniform_int(0, 300)));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
    }
    EXPECT_EQ(code_of([] { base64_decode("abc"); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { base64_decode("@@@@"); }), ErrorCode::ProtocolError);
}

TEST(Logits, LittleEndianRoundTrip) {
    ScoreMap m(3, 2, 0.0f);
    m.at(0, 0) = 1.0f;
    m.at(2, 1) = -0.0f;
    const auto bytes = encode_logits(m);
    ASSERT_EQ(bytes.size(), 24u);
    EXPECT_EQ((std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4)),
              (std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3f}));
    EXPECT_EQ(bytes[23], 0x80);
    const ScoreMap back = decode_logits(bytes, 3, 2);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint32_t>(back[i]), std::bit_cast<std::uint32_t>(m[i]));
    EXPECT_EQ(code_of([&] { decode_logits(bytes, 2, 2); }), ErrorCode::ProtocolError);
}

TEST(WireFixtures, DecodeToKnownValues) {
    const WireSegmentRequest req = decode_segment_request(fixture("segment_request.json"));
    EXPECT_EQ(req.image.width(), 5);
    EXPECT_EQ(req.image.height(), 4);
    EXPECT_EQ(req.image.pixel(1, 2)[2], 40);
    EXPECT_EQ(req.image.pixel(4, 3)[0], 250);
    EXPECT_EQ(req.box, (BBox{0, 0, 4, 3}));
    EXPECT_EQ(req.positives, std::vector<Point>{(Point{1, 1})});
    EXPECT_EQ(req.negatives, std::vector<Point>{(Point{3, 2})});
    EXPECT_EQ(decode_image_request(fixture("image_request.json")), req.image);

    const SegmentResponse res = decode_segment_response(fixture("segment_response.json"));
    const float logits[] = {-1.5f, 1.0f, 2.25f, -0.5f, -2.0f, 0.125f, 3.0f, -1.0f, -3.0f, -0.0f, 0.5f, -4.0f};
    ASSERT_EQ(res.logits.width(), 4);
    ASSERT_EQ(res.logits.height(), 3);
    for (std::size_t i = 0; i < 12; ++i) {
        EXPECT_EQ(res.logits[i], logits[i]);
        EXPECT_EQ(res.mask[i], logits[i] > 0.0f ? 1 : 0);
    }
    EXPECT_EQ(res.score, 0.875);

    const auto boxes = decode_detect_response(fixture("detect_response.json"));
    EXPECT_EQ(boxes, (std::vector<DetectedBox>{{{1, 2, 11, 20}, 0.95}, {{12, 2, 20, 20}, 0.5}, {{21, 3, 30, 19}, 1.0}}));
    EXPECT_EQ(decode_recognize_response(fixture("recognize_response.json")), (RecognitionResult{"vi", {0.75, 0.5}}));
    const HealthStatus h = decode_health(fixture("health_response.json"));
    EXPECT_EQ(h.status, "ok");
    EXPECT_EQ(h.models.at("detector"), "craft-synthtext");
}

TEST(WireFixtures, MalformedAreProtocolErrors) {
    EXPECT_EQ(code_of([] { decode_segment_response(fixture("bad_mask_disagrees.json")); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_segment_response(fixture("bad_logits_short.json")); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_segment_response(fixture("bad_base64.json")); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_detect_response(fixture("bad_confidence.json")); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_detect_response(fixture("bad_box_arity.json")); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_recognize_response(fixture("bad_recognize_length.json")); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_health("[1, 2]"); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([] { decode_segment_request("{\"image_b64\": \"\"}"); }), ErrorCode::ProtocolError);
}

TEST(WireRoundTrip, RandomMessages) {
    Rng rng(19);
    for (int i = 0; i < 30; ++i) {
        const int w = static_cast<int>(rng.uniform_int(1, 40)), h = static_cast<int>(rng.uniform_int(1, 40));
        WireSegmentRequest req;
        req.image = RgbImage(w, h);
        for (auto& b : req.image.bytes()) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        req.box = {0, 0, w, h};
        req.positives = {{static_cast<int>(rng.uniform_int(0, w - 1)), 0}};
        const WireSegmentRequest r2 = decode_segment_request(encode_segment_request(req));
        EXPECT_EQ(r2.image, req.image);
        EXPECT_EQ(r2.box, req.box);
        EXPECT_EQ(r2.positives, req.positives);
        EXPECT_TRUE(r2.negatives.empty());

        const BitMask mask = random_mask(rng, w, h, rng.uniform());
        SegmentResponse res{mask, signed_distance(mask), rng.uniform()};
        const SegmentResponse back = decode_segment_response(encode_segment_response(res));
        EXPECT_EQ(back.mask, res.mask);
        EXPECT_EQ(back.logits, res.logits);
        EXPECT_EQ(back.score, res.score);
    }
    const HealthStatus h{"ok", {{"segmenter", "x"}}};
    EXPECT_EQ(decode_health(encode_health(h)), h);
}

TEST(RemoteBackend, DetectFixtureIsParsedExactly) {
    Stub stub;
    stub.server.Post("/v1/detect_chars", [](const httplib::Request& req, httplib::Response& res) {
        const RgbImage crop = decode_image_request(req.body);
        EXPECT_EQ(crop.width(), 50);
        EXPECT_EQ(crop.height(), 30);
        res.set_content(fixture("detect_response.json"), "application/json");
    });
    RemoteConfig cfg = quick(stub.start() + "/v1/");
    cfg.crop_margin = 0.0;
    RemoteBackend remote(cfg);
    const RgbImage img = white(100, 60);
    const auto boxes = remote.detect_chars({"a", &img, 100, 60}, {10, 10, 60, 40});
    EXPECT_EQ(boxes, (std::vector<DetectedBox>{{{11, 12, 21, 30}, 0.95}, {{22, 12, 30, 30}, 0.5}, {{31, 13, 40, 29}, 1.0}}));
}

TEST(RemoteBackend, SegmentShiftsPromptsAndCropsResult) {
    Stub stub;
    WireSegmentRequest seen;
    stub.server.Post("/segment", [&](const httplib::Request& req, httplib::Response& res) {
        seen = decode_segment_request(req.body);
        res.set_content(encode_segment_response(threshold_segment(seen)), "application/json");
    });
    RemoteBackend remote(quick(stub.start()));
    RgbImage img = white(120, 80);
    paint(img, {40, 30, 60, 50}, {0, 0, 0});
    paint(img, {70, 30, 80, 50}, {0, 0, 0});
    const BBox box{35, 25, 85, 55};
    const SegmentResponse r = remote.segment({"a", &img, 120, 80}, {box, {{45, 35}}, {}});
    const BBox crop = clamp_to(pad(box, 0.1), 120, 80);
    EXPECT_EQ(seen.image.width(), crop.width());
    EXPECT_EQ(seen.box, (BBox{box.x_min - crop.x_min, box.y_min - crop.y_min, box.x_max - crop.x_min, box.y_max - crop.y_min}));
    EXPECT_EQ(seen.positives, std::vector<Point>{(Point{45 - crop.x_min, 35 - crop.y_min})});
    validate_response(r, box);
    // Only the prompted square survives.
    EXPECT_EQ(count(r.mask), 400);
    EXPECT_EQ(r.mask.at(10, 10), 1);
    EXPECT_EQ(r.mask.at(40, 10), 0);
}

TEST(RemoteBackend, RetriesServerErrorsThenSucceeds) {
    Stub stub;
    std::atomic<int> hits{0};
    stub.server.Post("/recognize", [&](const httplib::Request&, httplib::Response& res) {
        if (hits++ < 2) {
            res.status = 503;
            return;
        }
        res.set_content(fixture("recognize_response.json"), "application/json");
    });
    RemoteBackend remote(quick(stub.start()));
    const RgbImage img = white(10, 10);
    EXPECT_EQ(remote.recognize({"a", &img, 10, 10}, {0, 0, 10, 10}).text, "vi");
    EXPECT_EQ(hits.load(), 3);
}

TEST(RemoteBackend, ClientErrorsAreNotRetried) {
    Stub stub;
    std::atomic<int> hits{0};
    stub.server.Post("/recognize", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content(fixture("bad_recognize_length.json"), "application/json");
    });
    RemoteBackend remote(quick(stub.start()));
    const RgbImage img = white(10, 10);
    EXPECT_EQ(code_of([&] { remote.recognize({"a", &img, 10, 10}, {0, 0, 10, 10}); }), ErrorCode::ProtocolError);
    EXPECT_EQ(code_of([&] { remote.detect_chars({"a", &img, 10, 10}, {0, 0, 10, 10}); }), ErrorCode::ProtocolError);
    EXPECT_EQ(hits.load(), 1);
}

TEST(RemoteBackend, UnreachableIsBackendUnavailable) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteConfig cfg = quick("http://127.0.0.1:" + std::to_string(port));
    cfg.retries = 2;
    cfg.timeout_seconds = 0.3;
    RemoteBackend remote(cfg);
    EXPECT_EQ(code_of([&] { remote.health(); }), ErrorCode::BackendUnavailable);
    EXPECT_EQ(code_of([] { RemoteBackend(RemoteConfig{"localhost:80"}); }), ErrorCode::ConfigError);
}

TEST(ReferenceService, RoutesAndStatusCodes) {
    ServiceConfig cfg;
    cfg.max_request_pixels = 100;
    const ReferenceService svc(cfg);
    EXPECT_EQ(svc.handle("GET", "/health", "").status, 200);
    EXPECT_EQ(svc.handle("POST", "/health", "").status, 405);
    EXPECT_EQ(svc.handle("GET", "/segment", "").status, 405);
    EXPECT_EQ(svc.handle("GET", "/other", "").status, 404);
    EXPECT_EQ(svc.handle("POST", "/segment", "{").status, 400);
    EXPECT_EQ(svc.handle("POST", "/detect_chars", encode_image_request(white(11, 10))).status, 413);
    const ServiceReply ok = svc.handle("POST", "/recognize", encode_image_request(white(10, 10)));
    EXPECT_EQ(ok.status, 200);
    EXPECT_EQ(decode_recognize_response(ok.body), RecognitionResult{});

    WireSegmentRequest outside{white(5, 5), {0, 0, 6, 5}, {}, {}};
    EXPECT_EQ(svc.handle("POST", "/segment", encode_segment_request(outside)).status, 400);
}

TEST(ReferenceService, ConformanceOverHttp) {
    ServiceConfig cfg;
    cfg.port = 0;
    ReferenceService svc(cfg);
    const int port = svc.start();
    RemoteBackend remote(quick("http://127.0.0.1:" + std::to_string(port)));
    EXPECT_EQ(remote.health().status, "ok");

    // Black square on white: the probe the real service must also pass.
    RgbImage img = white(96, 96);
    const BBox square{30, 28, 62, 60};
    paint(img, square, {0, 0, 0});
    const BBox box{24, 22, 70, 66};
    const SegmentResponse r = remote.segment({"probe", &img, 96, 96}, {box, {}, {}});
    BitMask truth(box.width(), box.height(), 0);
    for (int y = square.y_min; y < square.y_max; ++y) {
        for (int x = square.x_min; x < square.x_max; ++x) truth.at(x - box.x_min, y - box.y_min) = 1;
    }
    EXPECT_GE(double(count(mask_and(r.mask, truth))) / double(count(mask_or(r.mask, truth))), 0.9);

    paint(img, {70, 28, 80, 60}, {10, 10, 10});
    const auto boxes = remote.detect_chars({"probe", &img, 96, 96}, {20, 20, 90, 70});
    EXPECT_EQ(boxes, (std::vector<DetectedBox>{{square, 1.0}, {{70, 28, 80, 60}, 1.0}}));

    // Identical requests give identical bytes.
    const std::string body = encode_segment_request({img, {2, 2, 90, 90}, {{40, 40}}, {}});
    EXPECT_EQ(svc.handle("POST", "/segment", body).body, svc.handle("POST", "/segment", body).body);
    svc.stop();
}
