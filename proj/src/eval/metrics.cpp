#include "glyphseg/eval/metrics.hpp"

#include <map>

#include <json.hpp>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/image.hpp"
#include "glyphseg/simd/kernels.hpp"

namespace glyphseg {

PixelTally tally(const BitMask& pred, const BitMask& gt) {
    if (!pred.same_shape(gt)) {
        throw Error(ErrorCode::ShapeMismatch, "prediction is " + std::to_string(pred.width()) + "x" +
                                                  std::to_string(pred.height()) + ", ground truth " +
                                                  std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
    }
    const simd::MaskCounts c = simd::active_kernels().tally(pred.data(), gt.data(), pred.size());
    return {c.tp, c.fp, c.fn, pred.size() - c.tp - c.fp - c.fn};
}

Metrics metrics(const PixelTally& t) {
    Metrics m;
    const double tp = double(t.tp), fp = double(t.fp), fn = double(t.fn);
    m.fg_iou = t.tp + t.fp + t.fn == 0 ? 1.0 : tp / (tp + fp + fn);
    m.precision = t.tp + t.fp == 0 ? (t.fn == 0 ? 1.0 : 0.0) : tp / (tp + fp);
    m.recall = t.tp + t.fn == 0 ? (t.fp == 0 ? 1.0 : 0.0) : tp / (tp + fn);
    m.f_score = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

EvalReport make_report(const std::vector<NamedTally>& tallies) {
    if (tallies.empty()) throw Error(ErrorCode::EmptyInput, "no images to evaluate");
    EvalReport r;
    for (const NamedTally& t : tallies) {
        r.images.push_back({t.id, t.tally, metrics(t.tally)});
        r.total += t.tally;
    }
    r.global = metrics(r.total);
    return r;
}

namespace {

nlohmann::json tally_json(const PixelTally& t) {
    return {{"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}, {"tn", t.tn}};
}

void put_metrics(nlohmann::json& j, const Metrics& m) {
    j["fg_iou"] = m.fg_iou;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f_score"] = m.f_score;
}

std::map<std::string, std::filesystem::path> png_files(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path root = fs::is_directory(dir / "masks") ? dir / "masks" : dir;
    if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, root.string() + " is not a directory");
    std::map<std::string, fs::path> out;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".png") out[e.path().stem().string()] = e.path();
    }
    return out;
}

}  // namespace

std::string report_json(const EvalReport& report, int indent) {
    nlohmann::json j;
    put_metrics(j, report.global);
    j["tally"] = tally_json(report.total);
    j["images"] = nlohmann::json::array();
    for (const ImageScore& s : report.images) {
        nlohmann::json e{{"id", s.id}};
        put_metrics(e, s.metrics);
        e["tally"] = tally_json(s.tally);
        j["images"].push_back(std::move(e));
    }
    return j.dump(indent);
}

EvalReport evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir) {
    const auto pred = png_files(pred_dir);
    const auto gt = png_files(gt_dir);
    for (const auto& [id, path] : gt) {
        if (!pred.count(id)) throw Error(ErrorCode::MissingPair, "no prediction for '" + id + "'");
    }
    for (const auto& [id, path] : pred) {
        if (!gt.count(id)) throw Error(ErrorCode::MissingPair, "no ground truth for '" + id + "'");
    }
    std::vector<NamedTally> tallies;
    for (const auto& [id, path] : gt) {
        const BitMask g = load_mask_png(path);
        const BitMask p = load_mask_png(pred.at(id));
        if (!p.same_shape(g)) throw Error(ErrorCode::ShapeMismatch, "mask sizes differ for '" + id + "'");
        tallies.push_back({id, tally(p, g)});
    }
    return make_report(tallies);
}

}  // namespace glyphseg
