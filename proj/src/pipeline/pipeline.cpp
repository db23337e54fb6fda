#include "glyphseg/pipeline/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <thread>

#include <json.hpp>

#include "glyphseg/backend/remote.hpp"
#include "glyphseg/error.hpp"
#include "glyphseg/raster/image.hpp"

namespace glyphseg {

using nlohmann::json;

std::string_view to_string(WordStatus status) {
    switch (status) {
        case WordStatus::Ok: return "ok";
        case WordStatus::FallbackUsed: return "fallback-used";
        case WordStatus::Failed: return "failed";
    }
    return "failed";
}

void validate_config(const RunConfig& c) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::ConfigError, why); };
    if (c.manifest.empty()) fail("--manifest is required");
    if (c.out.empty()) fail("--out is required");
    if (c.bank.empty() == c.fonts.empty() && !c.prompts.word_boxes) fail("give exactly one of --bank and --fonts");
    if (!(c.cgr.tau > 0.0 && c.cgr.tau <= 1.0)) fail("--tau must lie in (0, 1]");
    if (c.cgr.k_pos < 0 || c.cgr.k_neg < 0) fail("--kpos and --kneg must be >= 0");
    if (c.min_confidence < 0.0 || c.min_confidence > 1.0) fail("detector confidence floor must lie in [0, 1]");
    if (c.threads < 1) fail("--threads must be >= 1");
    if (c.max_in_flight < 0) fail("--max-in-flight must be >= 0");
    if (c.backend == BackendKind::Remote && c.endpoint.empty()) fail("--endpoint is required for the remote backend");
    if (c.backend == BackendKind::Oracle && !c.endpoint.empty()) fail("--endpoint only applies to the remote backend");
    if (c.oracle.merge_rate < 0.0 || c.oracle.merge_rate > 1.0) fail("merge rate must lie in [0, 1]");
    if (c.retries < 0) fail("--retries must be >= 0");
    if (!(c.timeout_seconds > 0.0)) fail("--timeout must be positive");
    for (double b : c.backoff_seconds) {
        if (!(b >= 0.0)) fail("backoff delays must be >= 0");
    }
}

// ---------------------------------------------------------------------------
// In-flight caps. Each wrapper admits at most `cap` concurrent calls.

namespace {

class Gate {
public:
    explicit Gate(int cap) : sem_(cap > 0 ? cap : 1), open_(cap <= 0) {}
    template <typename F>
    auto run(F&& f) {
        if (open_) return f();
        sem_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{sem_};
        return f();
    }

private:
    std::counting_semaphore<> sem_;
    bool open_;
};

class GatedSegmenter final : public Segmenter {
public:
    GatedSegmenter(Segmenter& inner, int cap) : inner_(inner), gate_(cap) {}
    SegmentResponse segment(const ImageRef& i, const SegmentRequest& r) override {
        return gate_.run([&] { return inner_.segment(i, r); });
    }

private:
    Segmenter& inner_;
    Gate gate_;
};

class GatedDetector final : public CharDetector {
public:
    GatedDetector(CharDetector& inner, int cap) : inner_(inner), gate_(cap) {}
    std::vector<DetectedBox> detect_chars(const ImageRef& i, const BBox& b) override {
        return gate_.run([&] { return inner_.detect_chars(i, b); });
    }

private:
    CharDetector& inner_;
    Gate gate_;
};

class GatedRecognizer final : public Recognizer {
public:
    GatedRecognizer(Recognizer& inner, int cap) : inner_(inner), gate_(cap) {}
    RecognitionResult recognize(const ImageRef& i, const BBox& b) override {
        return gate_.run([&] { return inner_.recognize(i, b); });
    }

private:
    Recognizer& inner_;
    Gate gate_;
};

std::string describe(const Error& e) { return e.what(); }

}  // namespace

// ---------------------------------------------------------------------------

AnnotatedImage annotate_image(const ImageRecord& record, const RgbImage* pixels, const Backends& backends,
                              const PromptGenerator* prompts, const AnnotateOptions& options) {
    const PromptOptions& p = options.prompts;
    if (!p.word_boxes && p.use_cgr && prompts == nullptr) {
        throw Error(ErrorCode::ConfigError, "glyph prompts requested without a template bank");
    }
    AnnotatedImage out;
    out.result.id = record.id;
    out.result.mask = BitMask(record.width, record.height, 0);
    out.outcome.id = record.id;
    const ImageRef ref{record.id, pixels, record.width, record.height};

    for (std::size_t wi = 0; wi < record.words.size(); ++wi) {
        const WordAnnotation& word = record.words[wi];
        WordOutcome outcome{static_cast<int>(wi), WordStatus::Ok, {}};
        std::vector<std::pair<BBox, BitMask>> pieces;
        std::vector<CharAnnotation> chars;
        try {
            if (p.word_boxes) {
                const BBox box = clamp_to(enclosing_bbox(word.quad), record.width, record.height);
                if (box.empty()) throw Error(ErrorCode::RefinementFailed, "word box lies outside the image");
                SegmentResponse r = backends.segmenter.segment(ref, {box, {}, {}});
                validate_response(r, box);
                pieces.emplace_back(box, std::move(r.mask));
            } else {
                RefinedWord refined = refine_word(ref, word, static_cast<int>(wi),
                                                  CbrBackends{backends.detector, backends.recognizer, backends.segmenter},
                                                  options.cbr);
                if (refined.fallback_used) {
                    outcome.status = WordStatus::FallbackUsed;
                    outcome.reason = refined.note;
                }
                for (const CharAnnotation& ch : refined.chars) {
                    PromptSet ps{ch.bbox, {}, {}, ch.category};
                    if (p.use_cgr) {
                        try {
                            ps = prompts->prompts_for_char(ch);
                        } catch (const Error& e) {
                            if (e.code() != ErrorCode::UnknownCategory) throw;
                            outcome.status = WordStatus::FallbackUsed;
                            outcome.reason = describe(e);
                        }
                    }
                    if (!p.use_pos) ps.positives.clear();
                    if (!p.use_neg) ps.negatives.clear();
                    SegmentResponse r = backends.segmenter.segment(ref, {ps.box, ps.positives, ps.negatives});
                    validate_response(r, ps.box);
                    pieces.emplace_back(ps.box, std::move(r.mask));
                }
                chars = std::move(refined.chars);
            }
        } catch (const Error& e) {
            outcome.status = WordStatus::Failed;
            outcome.reason = describe(e);
            pieces.clear();
            chars.clear();
        }
        for (const auto& [box, mask] : pieces) paste_or(out.result.mask, mask, {box.x_min, box.y_min});
        out.result.chars.insert(out.result.chars.end(), chars.begin(), chars.end());
        out.outcome.words.push_back(std::move(outcome));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string config_json(const RunConfig& c) {
    json j;
    j["manifest"] = c.manifest.string();
    j["images"] = c.images.string();
    if (!c.bank.empty()) j["bank"] = c.bank.string();
    if (!c.fonts.empty()) j["fonts"] = c.fonts.string();
    j["backend"] = c.backend == BackendKind::Oracle ? "oracle" : "remote";
    if (c.backend == BackendKind::Remote) {
        j["endpoint"] = c.endpoint;
        j["retries"] = c.retries;
        j["backoff_seconds"] = c.backoff_seconds;
        j["timeout_seconds"] = c.timeout_seconds;
    }
    if (c.backend == BackendKind::Oracle) {
        j["scenes"] = c.scenes.string();
        j["oracle"] = {{"fill_holes", c.oracle.corruption.fill_holes},
                       {"truncate", c.oracle.corruption.truncate},
                       {"truncate_fraction", c.oracle.corruption.truncate_fraction},
                       {"bridge", c.oracle.corruption.bridge},
                       {"merge_rate", c.oracle.merge_rate},
                       {"noise_boxes", c.oracle.noise_boxes},
                       {"empty_rate", c.oracle.empty_rate}};
    }
    j["tau"] = c.cgr.tau;
    j["kpos"] = c.cgr.k_pos;
    j["kneg"] = c.cgr.k_neg;
    j["prompts"] = {{"word_boxes", c.prompts.word_boxes},
                    {"cgr", c.prompts.use_cgr},
                    {"pos", c.prompts.use_pos},
                    {"neg", c.prompts.use_neg}};
    j["min_confidence"] = c.min_confidence;
    j["max_in_flight"] = c.max_in_flight;
    j["threads"] = c.threads;
    j["seed"] = c.seed;
    j["out"] = c.out.string();
    if (!c.gt.empty()) j["gt"] = c.gt.string();
    return j.dump();
}

std::string RunReport::to_json(int indent) const {
    json j;
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    j["counts"] = {{"words", total_words}, {"ok", ok}, {"fallback_used", fallback_used}, {"failed", failed}};
    j["wall_seconds"] = wall_seconds;
    j["images"] = json::array();
    for (const ImageOutcome& img : images) {
        json words = json::array();
        for (const WordOutcome& w : img.words) {
            json e{{"index", w.word}, {"status", std::string(to_string(w.status))}};
            if (!w.reason.empty()) e["reason"] = w.reason;
            words.push_back(std::move(e));
        }
        j["images"].push_back({{"id", img.id}, {"words", std::move(words)}});
    }
    if (eval) j["eval"] = json::parse(report_json(*eval, -1));
    return j.dump(indent);
}

TemplateBank obtain_bank(const RunConfig& config) {
    if (!config.bank.empty()) return load_bank(config.bank);
    return build_template_bank(config.fonts, kDefaultCategories, kDefaultGrid, config.threads).bank;
}

RunReport annotate(const RunConfig& config_in) {
    RunConfig config = config_in;
    if (config.images.empty()) config.images = config.manifest.parent_path() / "images";
    if (config.backend == BackendKind::Oracle && config.scenes.empty()) config.scenes = config.images.parent_path();
    config.oracle.seed = config.seed;
    validate_config(config);
    const auto started = std::chrono::steady_clock::now();

    const DatasetManifest manifest = load_manifest(config.manifest);
    std::optional<TemplateBank> bank;
    if (!config.prompts.word_boxes && config.prompts.use_cgr) bank = obtain_bank(config);
    std::optional<PromptGenerator> generator;
    if (bank) generator.emplace(*bank, config.cgr);

    std::unique_ptr<OracleBackend> oracle;
    std::unique_ptr<RemoteBackend> remote;
    Segmenter* seg = nullptr;
    CharDetector* det = nullptr;
    Recognizer* rec = nullptr;
    if (config.backend == BackendKind::Oracle) {
        oracle = std::make_unique<OracleBackend>(load_corpus(config.scenes), config.oracle);
        seg = oracle.get();
        det = oracle.get();
        rec = oracle.get();
    } else {
        RemoteConfig rc;
        rc.endpoint = config.endpoint;
        rc.retries = config.retries;
        rc.backoff_seconds = config.backoff_seconds;
        rc.timeout_seconds = config.timeout_seconds;
        if (config.max_in_flight > 0) rc.max_in_flight = config.max_in_flight;
        remote = std::make_unique<RemoteBackend>(rc);
        seg = remote.get();
        det = remote.get();
        rec = remote.get();
    }
    auto cap = [&](int declared) { return config.max_in_flight > 0 ? config.max_in_flight : declared; };
    GatedSegmenter gated_seg(*seg, cap(seg->max_in_flight()));
    GatedDetector gated_det(*det, cap(det->max_in_flight()));
    GatedRecognizer gated_rec(*rec, cap(rec->max_in_flight()));
    const Backends backends{gated_seg, gated_det, &gated_rec};

    AnnotateOptions options;
    options.prompts = config.prompts;
    options.cbr.min_confidence = config.min_confidence;

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + config.out.string());

    const std::size_t n = manifest.images.size();
    std::vector<ImageOutcome> outcomes(n);
    std::vector<ExportEntry> entries(n);
    std::vector<std::exception_ptr> fatal(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const ImageRecord& record = manifest.images[i];
            try {
                std::optional<RgbImage> pixels;
                std::string load_error;
                try {
                    pixels = load_rgb_png(config.images / record.file);
                    if (pixels->width() != record.width || pixels->height() != record.height) {
                        load_error = describe(Error(ErrorCode::ShapeMismatch, record.file + " does not match the manifest size"));
                        pixels.reset();
                    }
                } catch (const Error& e) {
                    load_error = describe(e);
                }
                AnnotatedImage done;
                if (pixels) {
                    done = annotate_image(record, &*pixels, backends, generator ? &*generator : nullptr, options);
                } else {
                    done.result = {record.id, BitMask(record.width, record.height, 0), {}};
                    done.outcome.id = record.id;
                    for (std::size_t w = 0; w < record.words.size(); ++w) {
                        done.outcome.words.push_back({static_cast<int>(w), WordStatus::Failed, load_error});
                    }
                }
                entries[i] = export_one(done.result, config.out);
                outcomes[i] = std::move(done.outcome);
            } catch (...) {
                fatal[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const int workers = std::max(1, std::min<int>(config.threads, static_cast<int>(std::max<std::size_t>(n, 1))));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    for (const auto& f : fatal) {
        if (f) std::rethrow_exception(f);
    }
    write_index(ExportIndex{entries}, config.out);

    RunReport report;
    report.config_json = config_json(config);
    report.images = std::move(outcomes);
    for (const ImageOutcome& img : report.images) {
        for (const WordOutcome& w : img.words) {
            ++report.total_words;
            if (w.status == WordStatus::Ok) ++report.ok;
            else if (w.status == WordStatus::FallbackUsed) ++report.fallback_used;
            else ++report.failed;
        }
    }
    if (!config.gt.empty()) report.eval = evaluate_dirs(config.out, config.gt);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_text(config.out / "report.json", report.to_json() + "\n");
    return report;
}

}  // namespace glyphseg
