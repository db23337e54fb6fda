#include <gtest/gtest.h>

#include <json.hpp>

#include "glyphseg/backend/scene.hpp"
#include "glyphseg/backend/service.hpp"
#include "glyphseg/pipeline/pipeline.hpp"
#include "../support/fixtures.hpp"

using namespace glyphseg;
using namespace glyphseg::testing;

namespace {

struct Corpus {
    TempDir dir;
    std::vector<SyntheticScene> scenes;
    int words = 0;

    explicit Corpus(int count) : scenes(generate_corpus(300, count, SceneSpec{}, heldout_fonts())) {
        save_corpus(dir.path(), scenes);
        save_bank(dir.path() / "bank.bin", shared_bank());
        for (const auto& s : scenes) words += static_cast<int>(s.words.size());
    }

    RunConfig config(const std::filesystem::path& out) const {
        RunConfig c;
        c.manifest = dir.path() / "manifest.json";
        c.bank = dir.path() / "bank.bin";
        c.gt = dir.path() / "gt";
        c.out = out;
        return c;
    }
};

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Annotate, OracleRunReproducesGroundTruth) {
    const Corpus corpus(3);
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.threads = 2;
    const RunReport report = annotate(cfg);
    EXPECT_EQ(report.exit_code(), 0);
    EXPECT_EQ(report.total_words, corpus.words);
    EXPECT_EQ(report.failed, 0);
    ASSERT_TRUE(report.eval.has_value());
    EXPECT_EQ(report.eval->global.fg_iou, 1.0);

    const ExportIndex index = load_index(out.path());
    ASSERT_EQ(index.entries.size(), corpus.scenes.size());
    for (std::size_t i = 0; i < corpus.scenes.size(); ++i) {
        const SyntheticScene& s = corpus.scenes[i];
        EXPECT_EQ(index.entries[i].id, s.id);
        EXPECT_EQ(load_mask_png(out.path() / index.entries[i].mask_path), s.gt);
        const auto chars = load_sidecar(out.path() / index.entries[i].chars_path);
        EXPECT_EQ(chars.size(), s.chars.size());
    }
    const auto j = nlohmann::json::parse(read_file(out.path() / "report.json"));
    EXPECT_EQ(j["counts"]["words"].get<int>(), corpus.words);
    EXPECT_EQ(j["config"]["backend"], "oracle");
    EXPECT_DOUBLE_EQ(j["eval"]["fg_iou"].get<double>(), 1.0);
}

TEST(Annotate, WordBoxModeNeedsNoBankAndExportsNoChars) {
    const Corpus corpus(2);
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.bank.clear();
    cfg.prompts.word_boxes = true;
    const RunReport report = annotate(cfg);
    EXPECT_EQ(report.failed, 0);
    EXPECT_EQ(report.eval->global.fg_iou, 1.0);
    for (const auto& e : load_index(out.path()).entries) EXPECT_TRUE(load_sidecar(out.path() / e.chars_path).empty());
}

TEST(Annotate, UnreadableImageFailsItsWordsOnly) {
    // Remote path: the oracle would refuse to start without its ground truth.
    const Corpus corpus(2);
    write_text(corpus.dir.path() / "images" / (corpus.scenes[0].id + ".png"), "not a png");
    ServiceConfig sc;
    sc.port = 0;
    ReferenceService svc(sc);
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.backend = BackendKind::Remote;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(svc.start());
    cfg.gt.clear();
    const RunReport report = annotate(cfg);
    EXPECT_EQ(report.failed, static_cast<int>(corpus.scenes[0].words.size()));
    EXPECT_EQ(report.exit_code(), 2);
    const auto index = load_index(out.path());
    const SyntheticScene& lost = corpus.scenes[0];
    EXPECT_EQ(load_mask_png(out.path() / index.entries[0].mask_path), BitMask(lost.gt.width(), lost.gt.height(), 0));
    EXPECT_GT(count(load_mask_png(out.path() / index.entries[1].mask_path)), 0);
    svc.stop();
}

TEST(Annotate, UnreachableRemoteFailsEveryWord) {
    const Corpus corpus(1);
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.backend = BackendKind::Remote;
    cfg.endpoint = "http://127.0.0.1:9";
    cfg.retries = 1;
    cfg.backoff_seconds = {0.0};
    cfg.timeout_seconds = 0.3;
    const RunReport report = annotate(cfg);
    EXPECT_EQ(report.failed, corpus.words);
    EXPECT_EQ(report.exit_code(), 2);
    for (const auto& img : report.images) {
        for (const auto& w : img.words) EXPECT_NE(w.reason.find("BackendUnavailable"), std::string::npos) << w.reason;
    }
}

TEST(Annotate, RemoteAgainstReferenceService) {
    const Corpus corpus(2);
    ServiceConfig sc;
    sc.port = 0;
    ReferenceService svc(sc);
    const int port = svc.start();
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.backend = BackendKind::Remote;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.threads = 2;
    const RunReport report = annotate(cfg);
    EXPECT_EQ(report.failed, 0);
    // Thresholding dark ink on a light page is close to exact.
    EXPECT_GT(report.eval->global.fg_iou, 0.8);
    svc.stop();
}

TEST(Config, Validation) {
    const RunConfig base = [] {
        RunConfig c;
        c.manifest = "m.json";
        c.bank = "b.bin";
        c.out = "out";
        return c;
    }();
    EXPECT_NO_THROW(validate_config(base));
    auto broken = [&](const std::function<void(RunConfig&)>& edit) {
        RunConfig c = base;
        edit(c);
        return code_of([&] { validate_config(c); });
    };
    EXPECT_EQ(broken([](RunConfig& c) { c.cgr.tau = 0.0; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.cgr.tau = 1.5; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.threads = 0; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.fonts = "fonts"; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.bank.clear(); }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.backend = BackendKind::Remote; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.endpoint = "http://x:1"; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.min_confidence = 2.0; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.retries = -1; }), ErrorCode::ConfigError);
    EXPECT_EQ(broken([](RunConfig& c) { c.out.clear(); }), ErrorCode::ConfigError);
}
