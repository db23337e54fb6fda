#include "glyphseg/backend/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "glyphseg/util/rng.hpp"

namespace glyphseg {

struct OracleBackend::Entry {
    SyntheticScene scene;
    std::vector<BitMask> holes;          // per char, over the char box
    std::vector<Components> hole_parts;  // 4-connected pieces of each
    std::vector<std::vector<int>> word_chars;
};

OracleBackend::OracleBackend(std::vector<SyntheticScene> scenes, OracleConfig config) : config_(std::move(config)) {
    if (!(config_.corruption.truncate_fraction >= 0.0 && config_.corruption.truncate_fraction < 1.0)) {
        throw Error(ErrorCode::ConfigError, "truncate fraction must lie in [0, 1)");
    }
    for (SyntheticScene& s : scenes) {
        auto e = std::make_unique<Entry>();
        for (const SceneChar& c : s.chars) {
            e->holes.push_back(hole_mask(c.mask));
            e->hole_parts.push_back(connected_components(e->holes.back(), Connectivity::Four));
        }
        e->word_chars.resize(s.words.size());
        for (std::size_t i = 0; i < s.chars.size(); ++i) {
            const int w = s.chars[i].word;
            if (w < 0 || w >= static_cast<int>(s.words.size())) {
                throw Error(ErrorCode::ValidationError, "character of " + s.id + " refers to a missing word");
            }
            e->word_chars[static_cast<std::size_t>(w)].push_back(static_cast<int>(i));
        }
        const std::string id = s.id;
        e->scene = std::move(s);
        if (!entries_.emplace(id, std::move(e)).second) {
            throw Error(ErrorCode::ValidationError, "duplicate scene id " + id);
        }
    }
}

OracleBackend::~OracleBackend() = default;

const OracleBackend::Entry& OracleBackend::entry(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(ErrorCode::InvalidArgument, "oracle has no scene " + id);
    return *it->second;
}

const SyntheticScene& OracleBackend::scene(const std::string& id) const { return entry(id).scene; }

SegmentResponse OracleBackend::segment(const ImageRef& image, const SegmentRequest& request) {
    const Entry& e = entry(image.id);
    const SyntheticScene& s = e.scene;
    const BBox box = request.box;
    if (box.empty() || !s.gt.bounds().contains(box)) {
        throw Error(ErrorCode::InvalidArgument, "segment box outside the image");
    }
    const int w = box.width(), h = box.height();
    const bool horizontal = w >= h;
    const BitMask truth = crop(s.gt, box);
    BitMask mask = truth;

    std::vector<std::size_t> touching;
    int centred = 0;
    for (std::size_t i = 0; i < s.chars.size(); ++i) {
        const BBox& cb = s.chars[i].box;
        if (intersect(cb, box).empty()) continue;
        touching.push_back(i);
        const Vec2 c = cb.center();
        if (c.x >= box.x_min && c.x < box.x_max && c.y >= box.y_min && c.y < box.y_max) ++centred;
    }
    auto local = [&](const BBox& cb) { return Point{cb.x_min - box.x_min, cb.y_min - box.y_min}; };

    const OracleCorruption& bad = config_.corruption;
    if (bad.bridge && centred >= 2) {
        const int lines = horizontal ? h : w;
        const int span = horizontal ? w : h;
        for (int l = 0; l < lines; ++l) {
            int first = -1, last = -1;
            for (int t = 0; t < span; ++t) {
                if (horizontal ? mask.at(t, l) : mask.at(l, t)) {
                    if (first < 0) first = t;
                    last = t;
                }
            }
            for (int t = first; first >= 0 && t <= last; ++t) (horizontal ? mask.at(t, l) : mask.at(l, t)) = 1;
        }
    }
    if (bad.fill_holes) {
        for (std::size_t i : touching) paste_or(mask, e.holes[i], local(s.chars[i].box));
    }
    if (bad.truncate) {
        const BBox ext = tight_bbox(mask);
        if (!ext.empty()) {
            const int lo = horizontal ? ext.x_min : ext.y_min;
            const int hi = horizontal ? ext.x_max : ext.y_max;
            const int drop = static_cast<int>(std::floor(bad.truncate_fraction * (hi - lo) + 1e-9));
            const int cut = hi - drop;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if ((horizontal ? x : y) >= cut) mask.at(x, y) = 0;
                }
            }
        }
    }

    auto to_local = [&](Point p) {
        if (!box.contains(p)) throw Error(ErrorCode::InvalidArgument, "point prompt outside its box");
        return Point{p.x - box.x_min, p.y - box.y_min};
    };
    std::optional<Components> truth_parts;
    for (Point p : request.positives) {
        const Point q = to_local(p);
        if (!truth.at(q) || mask.at(q)) continue;
        if (!truth_parts) truth_parts = connected_components(truth, Connectivity::Eight);
        const int label = truth_parts->labels.at(q);
        for (std::size_t k = 0; k < mask.size(); ++k) {
            if (truth_parts->labels[k] == label) mask[k] = 1;
        }
    }
    if (!request.negatives.empty()) {
        LabelMap counters(w, h, 0);
        int base = 0;
        for (std::size_t i : touching) {
            const Components& parts = e.hole_parts[i];
            const Point o = local(s.chars[i].box);
            for (int y = 0; y < parts.labels.height(); ++y) {
                for (int x = 0; x < parts.labels.width(); ++x) {
                    const int l = parts.labels.at(x, y);
                    if (l > 0 && counters.in_bounds(o.x + x, o.y + y)) counters.at(o.x + x, o.y + y) = base + l;
                }
            }
            base += static_cast<int>(parts.items.size());
        }
        for (Point p : request.negatives) {
            const int label = counters.at(to_local(p));
            if (label == 0) continue;
            for (std::size_t k = 0; k < mask.size(); ++k) {
                if (counters[k] == label) mask[k] = 0;
            }
        }
    }

    SegmentResponse r;
    r.logits = signed_distance(mask);
    r.mask = std::move(mask);
    r.score = 1.0;
    return r;
}

std::vector<int> OracleBackend::merged_pairs(const std::string& image_id, int word_index) const {
    const Entry& e = entry(image_id);
    if (word_index < 0 || word_index >= static_cast<int>(e.word_chars.size())) {
        throw Error(ErrorCode::InvalidArgument, "oracle word index out of range");
    }
    const int n = static_cast<int>(e.word_chars[static_cast<std::size_t>(word_index)].size());
    std::set<int> firsts;
    if (auto it = config_.merges.find({image_id, word_index}); it != config_.merges.end()) {
        for (auto [a, b] : it->second) {
            if (b != a + 1 || a < 0 || b >= n) {
                throw Error(ErrorCode::ConfigError, "merge pair must name adjacent characters of the word");
            }
            firsts.insert(a);
        }
    }
    if (config_.merge_rate > 0.0) {
        const std::uint64_t h = hash_combine(hash_combine(config_.seed, hash_string(image_id)), std::uint64_t(word_index));
        for (int i = 0; i + 1 < n; ++i) {
            if (unit_interval(hash_combine(h, std::uint64_t(i))) < config_.merge_rate) firsts.insert(i);
        }
    }
    return {firsts.begin(), firsts.end()};
}

std::vector<DetectedBox> OracleBackend::detect_chars(const ImageRef& image, const BBox& word_box) {
    const Entry& e = entry(image.id);
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t i = 0; i < e.scene.words.size(); ++i) {
        const double v = iou(e.scene.words[i].box, word_box);
        if (v > best_iou) {
            best_iou = v;
            best = static_cast<int>(i);
        }
    }
    std::vector<DetectedBox> out;
    if (best < 0) return out;
    const auto& members = e.word_chars[static_cast<std::size_t>(best)];
    const std::vector<int> firsts = merged_pairs(image.id, best);
    BBox group;
    for (std::size_t i = 0; i < members.size(); ++i) {
        group = unite(group, e.scene.chars[static_cast<std::size_t>(members[i])].box);
        if (std::binary_search(firsts.begin(), firsts.end(), static_cast<int>(i))) continue;
        const BBox clipped = intersect(group, word_box);
        if (!clipped.empty()) out.push_back({clipped, 1.0});
        group = {};
    }
    const std::uint64_t h = hash_combine(hash_combine(config_.seed ^ 0x6e6f697365ULL, hash_string(image.id)), std::uint64_t(best));
    for (int k = 0; k < config_.noise_boxes; ++k) {
        const std::uint64_t hk = hash_combine(h, std::uint64_t(k));
        const int bw = std::max(1, word_box.width() / 6), bh = std::max(1, word_box.height() / 3);
        const int x = word_box.x_min + static_cast<int>(unit_interval(hk) * std::max(1, word_box.width() - bw));
        const int y = word_box.y_min + static_cast<int>(unit_interval(hk + 1) * std::max(1, word_box.height() - bh));
        const BBox noise = intersect({x, y, x + bw, y + bh}, word_box);
        if (!noise.empty()) out.push_back({noise, config_.noise_confidence});
    }
    return out;
}

RecognitionResult OracleBackend::recognize(const ImageRef& image, const BBox& crop_box) {
    const Entry& e = entry(image.id);
    if (config_.empty_rate > 0.0) {
        std::uint64_t h = hash_combine(config_.seed ^ 0x7265636fULL, hash_string(image.id));
        for (int v : {crop_box.x_min, crop_box.y_min, crop_box.x_max, crop_box.y_max}) h = hash_combine(h, std::uint64_t(std::int64_t(v)));
        if (unit_interval(h) < config_.empty_rate) return {};
    }
    RecognitionResult r;
    const double conf = std::clamp(config_.confidence_scale, 0.0, 1.0);
    for (const SceneChar& c : e.scene.chars) {
        if (2 * intersect(c.box, crop_box).area() > c.box.area()) {
            r.text.push_back(c.category);
            r.confidences.push_back(conf);
        }
    }
    return r;
}

}  // namespace glyphseg
