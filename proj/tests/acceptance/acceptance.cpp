// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status
// is nonzero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "glyphseg/backend/oracle.hpp"
#include "glyphseg/backend/scene.hpp"
#include "glyphseg/cbr/cbr.hpp"
#include "glyphseg/cgr/prompts.hpp"
#include "glyphseg/error.hpp"
#include "glyphseg/eval/metrics.hpp"
#include "glyphseg/glyph/templates.hpp"
#include "glyphseg/pipeline/pipeline.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "glyphseg/raster/watershed.hpp"
#include "../support/oracles.hpp"

using namespace glyphseg;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds and sizes.
constexpr std::uint64_t kCorpusSeed = 1000;
constexpr int kCorpusScenes = 50;
constexpr double kClosureRuntimeLimit = 60.0;  // seconds, single-threaded
constexpr double kRepairIoUFloor = 0.95;
constexpr double kRepairFFloor = 0.97;
constexpr double kAblationGapFloor = 0.05;
constexpr std::uint64_t kCbrSeed = 5000;
constexpr int kCbrWords = 200;
constexpr double kCbrMergeRate = 0.3;
constexpr double kCbrCountFloor = 0.98;
constexpr double kCbrIoUFloor = 0.95;
constexpr double kCbrBoxIoU = 0.7;
constexpr int kMinBankFonts = 10;
constexpr double kTau = 0.6;
constexpr int kTallyPairs = 1000;
constexpr int kHungarianCases = 500;
constexpr int kMaxCcSide = 32;
constexpr int kWatershedFixtures = 200;

const fs::path kFontRoot = GLYPHSEG_FONT_DIR;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!pass) ++failures;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CorpusRun {
    EvalReport eval;
    int words = 0;
    int failed = 0;
    int fallback = 0;
};

CorpusRun run_corpus(const std::vector<SyntheticScene>& scenes, OracleBackend& oracle, const PromptGenerator& gen,
                     const PromptOptions& prompts) {
    AnnotateOptions options;
    options.prompts = prompts;
    const Backends backends{oracle, oracle, &oracle};
    CorpusRun run;
    std::vector<NamedTally> tallies;
    for (const SyntheticScene& s : scenes) {
        const AnnotatedImage a = annotate_image(s.record(), &s.image, backends, &gen, options);
        tallies.push_back({s.id, tally(a.result.mask, s.gt)});
        for (const WordOutcome& w : a.outcome.words) {
            ++run.words;
            run.failed += w.status == WordStatus::Failed;
            run.fallback += w.status == WordStatus::FallbackUsed;
        }
    }
    run.eval = make_report(tallies);
    return run;
}

// ---------------------------------------------------------------------------

void closure(const std::vector<SyntheticScene>& scenes, const std::vector<Font>& heldout) {
    const auto t0 = std::chrono::steady_clock::now();
    const TemplateBank bank = build_template_bank(kFontRoot / "bank", kDefaultCategories, kDefaultGrid, 1).bank;
    const auto fresh = generate_corpus(kCorpusSeed, kCorpusScenes, SceneSpec{}, heldout);
    OracleBackend oracle(fresh);
    const PromptGenerator gen(bank, {kTau, 5, 3});
    const CorpusRun run = run_corpus(fresh, oracle, gen, {});
    const double elapsed = seconds_since(t0);
    const bool pass = run.eval.global.fg_iou == 1.0 && run.failed == 0 && elapsed < kClosureRuntimeLimit &&
                      fresh.size() == scenes.size();
    report("e2e-oracle-closure", pass,
           std::to_string(fresh.size()) + " scenes, " + std::to_string(run.words) + " words, fgIoU=" +
               fmt(run.eval.global.fg_iou, 6) + " (need exactly 1), failed words=" + std::to_string(run.failed) +
               ", " + fmt(elapsed, 2) + " s incl. bank build (need < " + fmt(kClosureRuntimeLimit, 0) + " s)");
}

void repair(const std::vector<SyntheticScene>& scenes, const TemplateBank& bank) {
    OracleConfig cfg;
    cfg.corruption.fill_holes = true;
    cfg.corruption.truncate = true;
    OracleBackend oracle(scenes, cfg);
    const PromptGenerator gen(bank, {kTau, 5, 3});
    const CorpusRun run = run_corpus(scenes, oracle, gen, {});
    const Metrics& m = run.eval.global;
    report("corrupted-oracle-repair", m.fg_iou >= kRepairIoUFloor && m.f_score >= kRepairFFloor && run.failed == 0,
           "fill-holes+truncate, box+pos+neg: fgIoU=" + fmt(m.fg_iou) + " (need >= " + fmt(kRepairIoUFloor, 2) +
               "), F=" + fmt(m.f_score) + " (need >= " + fmt(kRepairFFloor, 2) + "), failed words=" +
               std::to_string(run.failed) + " of " + std::to_string(run.words));
}

void prompt_granularity(const std::vector<SyntheticScene>& scenes, const TemplateBank& bank) {
    OracleConfig cfg;
    cfg.corruption.fill_holes = true;
    cfg.corruption.truncate = true;
    cfg.corruption.bridge = true;
    OracleBackend oracle(scenes, cfg);
    const PromptGenerator gen(bank, {kTau, 5, 3});
    struct Setting {
        const char* name;
        PromptOptions prompts;
    };
    const Setting settings[] = {
        {"word-box", {true, false, false, false}},
        {"char-box", {false, false, true, true}},
        {"char-box+pos", {false, true, true, false}},
        {"char-box+pos+neg", {false, true, true, true}},
    };
    std::vector<double> iou;
    std::string detail = "fill-holes+truncate+bridge:";
    int failed = 0;
    for (const Setting& s : settings) {
        const CorpusRun run = run_corpus(scenes, oracle, gen, s.prompts);
        iou.push_back(run.eval.global.fg_iou);
        failed += run.failed;
        detail += std::string(" ") + s.name + "=" + fmt(run.eval.global.fg_iou);
    }
    bool increasing = true;
    for (std::size_t i = 1; i < iou.size(); ++i) increasing = increasing && iou[i] > iou[i - 1];
    const double gap = iou.back() - iou.front();
    detail += ", full-minus-word-box=" + fmt(gap) + " (need >= " + fmt(kAblationGapFloor, 2) + ", strictly increasing)";
    report("prompt-granularity-ablation", increasing && gap >= kAblationGapFloor && failed == 0, detail);
}

void cbr_recovery(const std::vector<Font>& heldout) {
    // Scenes are drawn until enough words exist; the first kCbrWords count.
    std::vector<SyntheticScene> scenes;
    int words = 0;
    for (int i = 0; words < kCbrWords; ++i) {
        scenes.push_back(generate_scene(kCbrSeed + i, SceneSpec{}, heldout, "cbr_" + std::to_string(i)));
        words += static_cast<int>(scenes.back().words.size());
    }
    OracleConfig cfg;
    cfg.merge_rate = kCbrMergeRate;
    cfg.seed = kCbrSeed;
    OracleBackend oracle(scenes, cfg);
    const CbrBackends backends{oracle, &oracle, oracle};

    int seen = 0, exact = 0, chars = 0, good = 0, pairs = 0, merged = 0, fallbacks = 0;
    for (const SyntheticScene& s : scenes) {
        const ImageRecord record = s.record();
        for (std::size_t w = 0; w < record.words.size() && seen < kCbrWords; ++w, ++seen) {
            const int n = static_cast<int>(s.words[w].text.size());
            pairs += n - 1;
            merged += static_cast<int>(oracle.merged_pairs(s.id, static_cast<int>(w)).size());
            std::vector<const SceneChar*> truth;
            for (const SceneChar& c : s.chars) {
                if (c.word == static_cast<int>(w)) truth.push_back(&c);
            }
            chars += n;
            try {
                const RefinedWord r = refine_word({s.id, &s.image, s.image.width(), s.image.height()},
                                                  record.words[w], static_cast<int>(w), backends);
                fallbacks += r.fallback_used;
                if (static_cast<int>(r.chars.size()) != n) continue;
                ++exact;
                for (const CharAnnotation& c : r.chars) {
                    const SceneChar& t = *truth[static_cast<std::size_t>(c.char_index)];
                    good += c.category == t.category && iou(c.bbox, t.box) >= kCbrBoxIoU;
                }
            } catch (const Error&) {
            }
        }
    }
    const double count_rate = double(exact) / seen;
    const double iou_rate = double(good) / chars;
    report("cbr-recovery", count_rate >= kCbrCountFloor && iou_rate >= kCbrIoUFloor,
           std::to_string(seen) + " words, " + std::to_string(merged) + "/" + std::to_string(pairs) +
               " adjacent pairs merged by the detector; exact box count " + fmt(100 * count_rate, 2) +
               "% (need >= " + fmt(100 * kCbrCountFloor, 0) + "%), chars with IoU >= 0.7 and right category " +
               fmt(100 * iou_rate, 2) + "% (need >= " + fmt(100 * kCbrIoUFloor, 0) + "%), words using a fallback " +
               std::to_string(fallbacks));
}

void glyph_topology(const TemplateBank& bank, const std::vector<Font>& heldout,
                    const std::vector<SyntheticScene>& scenes) {
    const std::string with_holes = "ADOPQRabdgopq04689";
    const std::string without = "CEFILTclt17";
    std::string wrong;
    for (char c : with_holes) {
        const GlyphVoteTable* t = bank.find(c);
        if (!t || count(consensus_mask(*t, VoteKind::Hole, kTau)) == 0) wrong.push_back(c);
    }
    for (char c : without) {
        const GlyphVoteTable* t = bank.find(c);
        if (!t || count(consensus_mask(*t, VoteKind::Hole, kTau)) != 0) wrong.push_back(c);
    }

    // Point hit rates on held-out fonts: every category at several sizes,
    // plus every character of the synthetic corpus.
    const PromptGenerator gen(bank, {kTau, 5, 3});
    long pos = 0, pos_hit = 0, neg = 0, neg_hit = 0;
    auto check = [&](const BitMask& ink, const PromptSet& ps, Point origin) {
        for (Point p : ps.positives) {
            ++pos;
            pos_hit += ink.at(p.x - origin.x, p.y - origin.y) != 0;
        }
        for (Point p : ps.negatives) {
            ++neg;
            neg_hit += ink.at(p.x - origin.x, p.y - origin.y) == 0;
        }
    };
    const std::string cats = parse_category_spec(kDefaultCategories);
    for (const Font& f : heldout) {
        for (float size : {24.0f, 32.0f, 40.0f, 56.0f}) {
            for (char c : cats) {
                const GlyphBitmap g = f.render(static_cast<unsigned char>(c), size);
                const BBox tight = tight_bbox(g.ink);
                const BitMask ink = crop(g.ink, tight);
                check(ink, gen.prompts_for_char({ink.bounds(), c, 0, 0}), {0, 0});
            }
        }
    }
    for (const SyntheticScene& s : scenes) {
        for (const SceneChar& c : s.chars) check(c.mask, gen.prompts_for_char({c.box, c.category, 0, 0}), {c.box.x_min, c.box.y_min});
    }
    const bool pass = bank.n_fonts >= kMinBankFonts && wrong.empty() && pos_hit == pos && neg_hit == neg && neg > 0;
    report("glyph-topology", pass,
           std::to_string(bank.n_fonts) + " fonts (need >= " + std::to_string(kMinBankFonts) +
               "), hole consensus mismatches: " + (wrong.empty() ? std::string("none") : wrong) +
               "; held-out positives on ink " + std::to_string(pos_hit) + "/" + std::to_string(pos) +
               ", negatives on background " + std::to_string(neg_hit) + "/" + std::to_string(neg) + " (need 100%)");
}

void oracle_equivalences() {
    Rng rng(77);
    // Metrics vs recount.
    int tally_ok = 0;
    std::vector<NamedTally> all;
    testing::BruteTally sum;
    for (int i = 0; i < kTallyPairs; ++i) {
        const BitMask a = testing::random_mask(rng, 16, 16, rng.uniform());
        const BitMask b = testing::random_mask(rng, 16, 16, rng.uniform());
        const PixelTally t = tally(a, b);
        const testing::BruteTally o = testing::brute_tally(a, b);
        tally_ok += t.tp == o.tp && t.fp == o.fp && t.fn == o.fn && t.tn == o.tn;
        sum.tp += o.tp;
        sum.fp += o.fp;
        sum.fn += o.fn;
        all.push_back({std::to_string(i), t});
    }
    const EvalReport r = make_report(all);
    const double oracle_iou = double(sum.tp) / double(sum.tp + sum.fp + sum.fn);
    const bool metrics_ok = tally_ok == kTallyPairs && r.global.fg_iou == oracle_iou;

    // Hungarian vs permutations.
    int hung_ok = 0;
    for (int i = 0; i < kHungarianCases; ++i) {
        const int rows = static_cast<int>(rng.uniform_int(1, 6));
        const int cols = static_cast<int>(rng.uniform_int(rows, 6));
        const auto cost = testing::random_costs(rng, rows, cols);
        const Matching m = solve_assignment(cost);
        std::set<int> used(m.column_of_row.begin(), m.column_of_row.end());
        hung_ok += used.size() == std::size_t(rows) && testing::row_sum(cost, m.column_of_row) == testing::brute_assignment(cost);
    }

    // Connected components vs union-find, every size up to 32x32.
    int cc_total = 0, cc_ok = 0;
    for (int h = 1; h <= kMaxCcSide; ++h) {
        for (int w = 1; w <= kMaxCcSide; ++w) {
            const BitMask m = testing::random_mask(rng, w, h, 0.2 + 0.5 * rng.uniform());
            for (bool eight : {true, false}) {
                ++cc_total;
                const Components c = connected_components(m, eight ? Connectivity::Eight : Connectivity::Four);
                cc_ok += testing::same_partition(testing::union_find_roots(m, eight), c.labels);
            }
        }
    }

    // Watershed invariants on bump fixtures.
    int ws_ok = 0;
    for (int i = 0; i < kWatershedFixtures; ++i) {
        const int w = static_cast<int>(rng.uniform_int(16, 64)), h = static_cast<int>(rng.uniform_int(16, 48));
        const int k = static_cast<int>(rng.uniform_int(1, 4));
        const int radius = marker_nms_radius(w, k);
        std::vector<testing::Bump> bumps;
        while (static_cast<int>(bumps.size()) < k) {
            const double sigma = 1.0 + rng.uniform() * 1.5;
            const testing::Bump b{double(rng.uniform_int(2, w - 3)), double(rng.uniform_int(2, h - 3)), 1.0 + rng.uniform(), sigma};
            bool far = true;
            for (const auto& o : bumps) {
                const double d = std::max(std::abs(o.x - b.x), std::abs(o.y - b.y));
                far = far && d > radius && d > 4 * std::max(sigma, o.sigma);
            }
            if (far) bumps.push_back(b);
        }
        const ScoreMap scores = testing::bump_map(w, h, bumps);
        BitMask domain(w, h, 1);
        if (rng.chance(0.5)) {
            // Ragged domain: random holes where the score is zero, so every
            // positive region still holds exactly one bump.
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) domain.at(x, y) = rng.chance(0.9) || scores.at(x, y) > 0.0f;
            }
        }
        try {
            const LabelMap a = watershed_partition(scores, domain, k);
            const LabelMap b = watershed_partition(scores, domain, k);
            std::vector<long> sizes(static_cast<std::size_t>(k) + 1, 0);
            bool ok = a == b;
            for (std::size_t p = 0; p < a.size(); ++p) {
                const int l = a[p];
                ok = ok && (domain[p] ? (l >= 1 && l <= k) : l == 0);
                if (l >= 1 && l <= k) ++sizes[static_cast<std::size_t>(l)];
            }
            for (int l = 1; l <= k; ++l) ok = ok && sizes[static_cast<std::size_t>(l)] > 0;
            for (const auto& bump : bumps) {
                // each bump centre in its own region
                const int l = a.at(static_cast<int>(bump.x), static_cast<int>(bump.y));
                for (const auto& other : bumps) {
                    if (&other != &bump) ok = ok && a.at(static_cast<int>(other.x), static_cast<int>(other.y)) != l;
                }
            }
            ws_ok += ok;
        } catch (const Error&) {
        }
    }

    const bool pass = metrics_ok && hung_ok == kHungarianCases && cc_ok == cc_total && ws_ok == kWatershedFixtures;
    report("oracle-equivalences", pass,
           "tally " + std::to_string(tally_ok) + "/" + std::to_string(kTallyPairs) + " (global fgIoU " +
               (r.global.fg_iou == oracle_iou ? "exact" : "differs") + "), hungarian " + std::to_string(hung_ok) +
               "/" + std::to_string(kHungarianCases) + ", components " + std::to_string(cc_ok) + "/" +
               std::to_string(cc_total) + ", watershed " + std::to_string(ws_ok) + "/" +
               std::to_string(kWatershedFixtures));
}

std::vector<std::uint8_t> slurp(const fs::path& p) { return read_file(p); }

void determinism(const std::vector<SyntheticScene>& scenes) {
    const fs::path root = fs::temp_directory_path() / ("glyphseg_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<SyntheticScene> subset(scenes.begin(), scenes.begin() + 10);
    save_corpus(root / "corpus", subset);

    RunConfig cfg;
    cfg.manifest = root / "corpus" / "manifest.json";
    cfg.fonts = kFontRoot / "bank";
    cfg.oracle.corruption.fill_holes = true;
    cfg.oracle.corruption.truncate = true;
    cfg.oracle.merge_rate = 0.3;
    cfg.seed = 99;
    cfg.threads = 4;
    std::vector<fs::path> outs = {root / "run_a", root / "run_b"};
    for (const fs::path& out : outs) {
        cfg.out = out;
        annotate(cfg);
    }
    int files = 0, same = 0;
    for (const auto& e : fs::recursive_directory_iterator(outs[0])) {
        if (!e.is_regular_file() || e.path().filename() == "report.json") continue;
        ++files;
        const fs::path other = outs[1] / fs::relative(e.path(), outs[0]);
        same += fs::exists(other) && slurp(e.path()) == slurp(other);
    }
    int masks = 0;
    for (const auto& e : fs::directory_iterator(outs[0] / "masks")) masks += e.is_regular_file();
    fs::remove_all(root);
    report("determinism", files > 0 && same == files && masks == static_cast<int>(subset.size()),
           std::to_string(same) + "/" + std::to_string(files) + " exported files byte-identical across two runs (" +
               std::to_string(masks) + " masks, 4 workers, corrupted oracle with merges)");
}

}  // namespace

int main() {
    try {
        const auto heldout = load_fonts(kFontRoot / "heldout");
        const auto scenes = generate_corpus(kCorpusSeed, kCorpusScenes, SceneSpec{}, heldout);
        const TemplateBank bank = build_template_bank(kFontRoot / "bank", kDefaultCategories).bank;

        closure(scenes, heldout);
        repair(scenes, bank);
        prompt_granularity(scenes, bank);
        cbr_recovery(heldout);
        glyph_topology(bank, heldout, scenes);
        oracle_equivalences();
        determinism(scenes);
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance-harness: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
