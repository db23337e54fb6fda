// Command-line front end: annotate, eval, glyphs build, synth, serve.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "glyphseg/backend/scene.hpp"
#include "glyphseg/backend/service.hpp"
#include "glyphseg/error.hpp"
#include "glyphseg/eval/metrics.hpp"
#include "glyphseg/glyph/templates.hpp"
#include "glyphseg/pipeline/pipeline.hpp"

using namespace glyphseg;

namespace {

void apply_corruptions(const std::vector<std::string>& names, OracleCorruption& c) {
    for (const std::string& n : names) {
        if (n == "fill-holes") c.fill_holes = true;
        else if (n == "truncate") c.truncate = true;
        else if (n == "bridge") c.bridge = true;
        else if (n == "none") continue;
        else throw Error(ErrorCode::ConfigError, "unknown corruption '" + n + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Character-level text mask annotation from word boxes"};
    app.require_subcommand(1);

    // annotate
    RunConfig run;
    std::string backend = "oracle";
    std::vector<std::string> corruptions;
    bool no_cgr = false, no_pos = false, no_neg = false;
    auto* annotate = app.add_subcommand("annotate", "Turn word annotations into character masks");
    annotate->add_option("--manifest", run.manifest, "Word-level manifest (JSON)")->required();
    annotate->add_option("--images", run.images, "Image directory (default: <manifest dir>/images)");
    auto* bank_opt = annotate->add_option("--bank", run.bank, "Template bank file");
    auto* fonts_opt = annotate->add_option("--fonts", run.fonts, "Font directory to build the bank from");
    bank_opt->excludes(fonts_opt);
    annotate->add_option("--backend", backend, "oracle or remote")->check(CLI::IsMember({"oracle", "remote"}));
    annotate->add_option("--endpoint", run.endpoint, "Model service URL, e.g. http://127.0.0.1:8080");
    annotate->add_option("--retries", run.retries, "Remote: retries after the first attempt")->capture_default_str();
    annotate->add_option("--backoff", run.backoff_seconds, "Remote: delays before each retry, seconds")->delimiter(',');
    annotate->add_option("--timeout", run.timeout_seconds, "Remote: per-request timeout, seconds")->capture_default_str();
    annotate->add_option("--scenes", run.scenes, "Oracle ground truth: a synth output directory (default: parent of --images)");
    annotate->add_option("--tau", run.cgr.tau, "Glyph vote threshold")->capture_default_str();
    annotate->add_option("--kpos", run.cgr.k_pos, "Positive points per character")->capture_default_str();
    annotate->add_option("--kneg", run.cgr.k_neg, "Negative points per character")->capture_default_str();
    auto* f_no_cgr = annotate->add_flag("--no-cgr", no_cgr, "Prompt with character boxes only");
    annotate->add_flag("--no-pos", no_pos, "Drop positive points");
    annotate->add_flag("--no-neg", no_neg, "Drop negative points");
    annotate->add_flag("--word-boxes", run.prompts.word_boxes, "Prompt with word boxes only (no refinement)")
        ->excludes(f_no_cgr);
    annotate->add_option("--min-confidence", run.min_confidence, "Detector confidence floor")->capture_default_str();
    annotate->add_option("--max-in-flight", run.max_in_flight, "Concurrent requests per backend (0: backend default)");
    annotate->add_option("--threads", run.threads, "Image workers")->capture_default_str();
    annotate->add_option("--seed", run.seed, "Seed for oracle randomness");
    annotate->add_option("--corrupt", corruptions, "Oracle failure modes: fill-holes, truncate, bridge")->delimiter(',');
    annotate->add_option("--truncate-fraction", run.oracle.corruption.truncate_fraction, "Share of the mask truncation drops")
        ->capture_default_str();
    annotate->add_option("--merge-rate", run.oracle.merge_rate, "Oracle detector: chance of merging each adjacent pair");
    annotate->add_option("--noise-boxes", run.oracle.noise_boxes, "Oracle detector: low-confidence boxes per word");
    annotate->add_option("--empty-rate", run.oracle.empty_rate, "Oracle recognizer: chance of an empty reading");
    annotate->add_option("--gt", run.gt, "Ground-truth mask directory to evaluate against");
    annotate->add_option("--out", run.out, "Output directory")->required();

    // eval
    std::filesystem::path pred_dir, gt_dir, eval_out;
    auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
    eval->add_option("--pred", pred_dir, "Predicted masks (directory of <id>.png or an annotate output)")->required();
    eval->add_option("--gt", gt_dir, "Ground-truth masks")->required();
    eval->add_option("--out", eval_out, "Also write the report here");

    // glyphs build
    std::filesystem::path font_dir, bank_out;
    std::string categories = kDefaultCategories;
    int grid = kDefaultGrid, bank_threads = 0;
    auto* glyphs = app.add_subcommand("glyphs", "Glyph template bank tools");
    glyphs->require_subcommand(1);
    auto* build = glyphs->add_subcommand("build", "Render fonts into a vote-table bank");
    build->add_option("--fonts", font_dir, "Font directory")->required();
    build->add_option("--categories", categories, "Characters, with ranges like A-Z")->capture_default_str();
    build->add_option("--grid", grid, "Template grid size")->capture_default_str();
    build->add_option("--threads", bank_threads, "Workers (0: all cores)");
    build->add_option("--out", bank_out, "Bank file")->required();

    // synth
    std::uint64_t synth_seed = 0;
    int synth_count = 10;
    std::filesystem::path synth_fonts, synth_out;
    SceneSpec spec;
    auto* synth = app.add_subcommand("synth", "Render a synthetic corpus with exact ground truth");
    synth->add_option("--seed", synth_seed, "Seed of the first scene")->required();
    synth->add_option("--count", synth_count, "Number of scenes")->required();
    synth->add_option("--fonts", synth_fonts, "Font directory")->required();
    synth->add_option("--width", spec.width)->capture_default_str();
    synth->add_option("--height", spec.height)->capture_default_str();
    synth->add_option("--min-words", spec.min_words)->capture_default_str();
    synth->add_option("--max-words", spec.max_words)->capture_default_str();
    synth->add_option("--categories", spec.categories)->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // serve
    ServiceConfig service;
    auto* serve = app.add_subcommand("serve", "Serve the model protocol with threshold stand-in models");
    serve->add_option("--host", service.host)->capture_default_str();
    serve->add_option("--port", service.port)->capture_default_str();
    serve->add_option("--max-request-pixels", service.max_request_pixels)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*annotate) {
            run.backend = backend == "remote" ? BackendKind::Remote : BackendKind::Oracle;
            run.prompts.use_cgr = !no_cgr;
            run.prompts.use_pos = !no_pos;
            run.prompts.use_neg = !no_neg;
            apply_corruptions(corruptions, run.oracle.corruption);
            const RunReport report = glyphseg::annotate(run);
            std::cout << report.to_json() << "\n";
            return report.exit_code();
        }
        if (*eval) {
            const EvalReport report = evaluate_dirs(pred_dir, gt_dir);
            const std::string text = report_json(report);
            std::cout << text << "\n";
            if (!eval_out.empty()) write_text(eval_out, text + "\n");
            return 0;
        }
        if (*build) {
            const BankBuild b = build_template_bank(font_dir, categories, grid, bank_threads);
            save_bank(bank_out, b.bank);
            std::cout << "fonts loaded: " << b.report.fonts_loaded.size() << ", tables: " << b.bank.tables.size() << "\n";
            for (const BuildFailure& f : b.report.failures) {
                std::cerr << "  " << f.font;
                if (f.category) std::cerr << " '" << f.category << "'";
                std::cerr << ": " << f.reason << "\n";
            }
            if (!b.report.skipped_categories.empty()) {
                std::cerr << "skipped categories: " << std::string(b.report.skipped_categories.begin(), b.report.skipped_categories.end()) << "\n";
            }
            return 0;
        }
        if (*synth) {
            const auto fonts = load_fonts(synth_fonts);
            const auto scenes = generate_corpus(synth_seed, synth_count, spec, fonts);
            save_corpus(synth_out, scenes);
            std::size_t words = 0, chars = 0;
            for (const auto& s : scenes) {
                words += s.words.size();
                chars += s.chars.size();
            }
            std::cout << scenes.size() << " scenes, " << words << " words, " << chars << " characters -> "
                      << synth_out.string() << "\n";
            return 0;
        }
        if (*serve) {
            ReferenceService server(service);
            std::cerr << "serving on " << service.host << ":" << service.port << "\n";
            server.run();
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "glyphseg: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "glyphseg: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
