#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glyphseg/backend/oracle.hpp"
#include "glyphseg/cbr/cbr.hpp"
#include "glyphseg/cgr/prompts.hpp"
#include "glyphseg/eval/metrics.hpp"

namespace glyphseg {

enum class BackendKind { Oracle, Remote };

/// Prompting switches. Defaults give the full method; word_boxes prompts
/// each word with its own box and skips character refinement entirely.
struct PromptOptions {
    bool word_boxes = false;
    bool use_cgr = true;  // false: character box only
    bool use_pos = true;
    bool use_neg = true;
};

struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path images;
    std::filesystem::path bank;   // template bank file, or
    std::filesystem::path fonts;  // font directory to build one from
    BackendKind backend = BackendKind::Oracle;
    std::string endpoint;          // remote
    int retries = 3;               // remote, after the first attempt
    std::vector<double> backoff_seconds = {0.5, 1.0, 2.0};
    double timeout_seconds = 30.0;
    std::filesystem::path scenes;  // oracle ground truth; defaults to the parent of `images`
    OracleConfig oracle;
    CgrConfig cgr;
    PromptOptions prompts;
    double min_confidence = 0.3;
    int max_in_flight = 0;  // 0: the backend's own default
    int threads = 1;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::filesystem::path gt;  // optional: evaluate the export against these masks
};

/// Throws ConfigError on an invalid combination.
void validate_config(const RunConfig& config);

enum class WordStatus { Ok, FallbackUsed, Failed };
std::string_view to_string(WordStatus status);

struct WordOutcome {
    int word = 0;
    WordStatus status = WordStatus::Ok;
    std::string reason;
};

struct ImageOutcome {
    std::string id;
    std::vector<WordOutcome> words;
};

struct Backends {
    Segmenter& segmenter;
    CharDetector& detector;
    Recognizer* recognizer = nullptr;
};

struct AnnotateOptions {
    PromptOptions prompts;
    CbrConfig cbr;
};

struct AnnotatedImage {
    ImageResult result;
    ImageOutcome outcome;
};

/// Runs one image: CBR per word, CGR per character, one segment call per
/// character, masks OR-composed. A word that throws contributes nothing
/// and is reported failed. `prompts` may be null only when CGR is off.
AnnotatedImage annotate_image(const ImageRecord& record, const RgbImage* pixels, const Backends& backends,
                              const PromptGenerator* prompts, const AnnotateOptions& options);

struct RunReport {
    std::vector<ImageOutcome> images;
    int total_words = 0;
    int ok = 0;
    int fallback_used = 0;
    int failed = 0;
    double wall_seconds = 0.0;
    std::string config_json;
    std::optional<EvalReport> eval;

    /// 0 when no word failed, 2 otherwise.
    int exit_code() const { return failed > 0 ? 2 : 0; }
    std::string to_json(int indent = 2) const;
};

/// Full run: load manifest and bank, annotate every image on `threads`
/// workers, export under config.out, write report.json there. Throws
/// ConfigError or IoError when the run cannot start.
RunReport annotate(const RunConfig& config);

/// Loads the bank file, or builds one from the font directory.
TemplateBank obtain_bank(const RunConfig& config);

std::string config_json(const RunConfig& config);

}  // namespace glyphseg
