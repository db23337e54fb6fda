#include "glyphseg/cbr/cbr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "glyphseg/raster/watershed.hpp"

namespace glyphseg {

double ReadingAxis::project(Vec2 p) const {
    if (length <= 0.0) return 0.0;
    return std::clamp((dot(p, direction) - start) / length, 0.0, 1.0);
}

ReadingAxis reading_axis(const Quad& q) {
    // Average each pair of opposite edges so slightly skewed quads behave.
    const Vec2 a = ((q[1] - q[0]) + (q[2] - q[3])) * 0.5;
    const Vec2 b = ((q[2] - q[1]) + (q[3] - q[0])) * 0.5;
    const double la = std::hypot(a.x, a.y), lb = std::hypot(b.x, b.y);
    Vec2 d;
    if (la > lb) d = a;
    else if (lb > la) d = b;
    else d = std::abs(a.x) >= std::abs(b.x) ? a : b;
    const double len = std::hypot(d.x, d.y);
    ReadingAxis axis;
    if (len == 0.0) return axis;
    d = d * (1.0 / len);
    if (std::abs(d.x) >= std::abs(d.y) ? d.x < 0 : d.y < 0) d = d * -1.0;
    axis.direction = d;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec2& v : q) {
        lo = std::min(lo, dot(v, d));
        hi = std::max(hi, dot(v, d));
    }
    axis.start = lo;
    axis.length = hi - lo;
    return axis;
}

void sort_reading_order(std::vector<BBox>& boxes, const ReadingAxis& axis) {
    std::stable_sort(boxes.begin(), boxes.end(), [&](const BBox& a, const BBox& b) {
        const double pa = dot(a.center(), axis.direction), pb = dot(b.center(), axis.direction);
        if (pa != pb) return pa < pb;
        return Point{a.x_min, a.y_min} < Point{b.x_min, b.y_min};
    });
}

// ---------------------------------------------------------------------------

Matching solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    Matching out;
    if (n == 0) return out;
    const int m = static_cast<int>(cost.front().size());
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != m) throw Error(ErrorCode::InvalidArgument, "ragged cost matrix");
        for (double c : row) {
            if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite assignment cost");
        }
    }
    if (n > m) throw Error(ErrorCode::InvalidArgument, "assignment needs rows <= columns");

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is the virtual start.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> row_of(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        row_of[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = row_of[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    out.column_of_row.assign(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (row_of[j] > 0) out.column_of_row[row_of[j] - 1] = j - 1;
    }
    for (int i = 0; i < n; ++i) out.total += cost[i][out.column_of_row[i]];
    return out;
}

std::vector<CharAssignment> assign_categories(std::span<const BBox> boxes, const std::string& transcription,
                                              std::span<const RecognitionResult> recognized,
                                              const AssignmentCost& cost, const ReadingAxis& axis) {
    const std::string text = strip_spaces(transcription);
    const int n = static_cast<int>(text.size());
    const int m = static_cast<int>(boxes.size());
    if (n == 0 || m < n) throw Error(ErrorCode::InvalidArgument, "need at least one box per character");
    if (!recognized.empty() && static_cast<int>(recognized.size()) != m) {
        throw Error(ErrorCode::InvalidArgument, "one recognition per box expected");
    }
    if (cost.order_weight < 0 || cost.recog_weight < 0 || cost.order_weight + cost.recog_weight <= 0) {
        throw Error(ErrorCode::InvalidArgument, "assignment weights must be non-negative and not both zero");
    }
    const double beta = recognized.empty() ? 0.0 : cost.recog_weight;
    // Rows are characters, columns boxes, so surplus boxes go unmatched.
    std::vector<std::vector<double>> c(n, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) {
        const double pos = axis.project(boxes[i].center());
        for (int j = 0; j < n; ++j) {
            const double target = n == 1 ? pos : double(j) / (n - 1);
            double conf = 0.0;
            if (beta > 0.0 && recognized[i].text.size() == 1 && recognized[i].text[0] == text[j] &&
                !recognized[i].confidences.empty()) {
                conf = recognized[i].confidences[0];
            }
            c[j][i] = cost.order_weight * std::abs(pos - target) + beta * (1.0 - conf);
        }
    }
    const Matching match = solve_assignment(c);
    std::vector<CharAssignment> out;
    for (int j = 0; j < n; ++j) out.push_back({boxes[match.column_of_row[j]], j, text[j]});
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Splits `total` into len(weights) parts of at least one each, the surplus
// by largest remainder (earlier index wins ties).
std::vector<int> apportion(int total, const std::vector<double>& weights) {
    const int k = static_cast<int>(weights.size());
    std::vector<int> out(k, 1);
    const int extra = total - k;
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> share(k);
    for (int i = 0; i < k; ++i) share[i] = sum > 0 ? extra * weights[i] / sum : double(extra) / k;
    int given = 0;
    std::vector<std::pair<double, int>> rest;
    for (int i = 0; i < k; ++i) {
        const int f = static_cast<int>(std::floor(share[i] + 1e-12));
        out[i] += f;
        given += f;
        rest.push_back({share[i] - f, i});
    }
    std::stable_sort(rest.begin(), rest.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (int r = 0; given < extra; ++r, ++given) out[rest[static_cast<std::size_t>(r % k)].second] += 1;
    return out;
}

}  // namespace

std::vector<TextSegment> detect_merges(std::span<const DetectedBox> boxes, const std::string& transcription,
                                       std::span<const RecognitionResult> recognized) {
    const std::string text = strip_spaces(transcription);
    const int n = static_cast<int>(text.size());
    const int m = static_cast<int>(boxes.size());
    if (m == 0 || m > n) {
        throw Error(ErrorCode::AlignmentFailed, std::to_string(m) + " boxes cannot carry " + std::to_string(n) + " characters");
    }
    if (!recognized.empty() && static_cast<int>(recognized.size()) != m) {
        throw Error(ErrorCode::InvalidArgument, "one recognition per box expected");
    }
    std::vector<int> claim(m, 0);
    int claimed = 0, open = 0;
    for (int i = 0; i < m; ++i) {
        claim[i] = recognized.empty() ? 0 : static_cast<int>(strip_spaces(recognized[i].text).size());
        claimed += claim[i];
        open += claim[i] == 0;
    }
    int left = n - claimed;
    if (!((open == 0 && left == 0) || (open > 0 && left >= open))) {
        std::fill(claim.begin(), claim.end(), 0);
        open = m;
        left = n;
    }
    if (open > 0) {
        std::vector<double> widths;
        for (int i = 0; i < m; ++i) {
            if (claim[i] == 0) widths.push_back(boxes[i].bbox.width());
        }
        const std::vector<int> parts = apportion(left, widths);
        for (int i = 0, u = 0; i < m; ++i) {
            if (claim[i] == 0) claim[i] = parts[static_cast<std::size_t>(u++)];
        }
    }
    std::vector<TextSegment> out;
    int at = 0;
    for (int i = 0; i < m; ++i) {
        out.push_back({boxes[i].bbox, text.substr(static_cast<std::size_t>(at), static_cast<std::size_t>(claim[i]))});
        at += claim[i];
    }
    if (at != n) throw Error(ErrorCode::AlignmentFailed, "segments do not cover the transcription");
    return out;
}

std::vector<BBox> proportional_split(const BBox& box, int k, const ReadingAxis& axis) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "split count must be positive");
    std::vector<BBox> out;
    const bool horizontal = axis.horizontal();
    const int lo = horizontal ? box.x_min : box.y_min;
    const int len = horizontal ? box.width() : box.height();
    for (int i = 0; i < k; ++i) {
        const int a = lo + static_cast<int>(std::int64_t(i) * len / k);
        const int b = lo + static_cast<int>(std::int64_t(i + 1) * len / k);
        out.push_back(horizontal ? BBox{a, box.y_min, b, box.y_max} : BBox{box.x_min, a, box.x_max, b});
    }
    const bool reversed = horizontal ? axis.direction.x < 0 : axis.direction.y < 0;
    if (reversed) std::reverse(out.begin(), out.end());
    return out;
}

std::vector<BBox> split_merged(const ImageRef& image, const BBox& box, int k, Segmenter& segmenter,
                               const ReadingAxis& axis, bool* used_fallback) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "split_merged needs k >= 2");
    if (used_fallback) *used_fallback = false;
    auto fallback = [&] {
        if (used_fallback) *used_fallback = true;
        return proportional_split(box, k, axis);
    };
    const SegmentResponse r = segmenter.segment(image, SegmentRequest{box, {}, {}});
    validate_response(r, box);
    LabelMap regions;
    try {
        regions = watershed_partition(r.logits, BitMask(box.width(), box.height(), 1), k);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientPeaks) throw;
        return fallback();
    }
    std::vector<BBox> out;
    for (int label = 1; label <= k; ++label) {
        BitMask ink(box.width(), box.height(), 0);
        for (std::size_t i = 0; i < ink.size(); ++i) ink[i] = regions[i] == label && r.mask[i];
        const Components parts = connected_components(ink, Connectivity::Eight);
        if (parts.items.empty()) return fallback();
        const BBox b = parts.items.front().box;
        out.push_back({b.x_min + box.x_min, b.y_min + box.y_min, b.x_max + box.x_min, b.y_max + box.y_min});
    }
    sort_reading_order(out, axis);
    return out;
}

// ---------------------------------------------------------------------------

RefinedWord refine_word(const ImageRef& image, const WordAnnotation& word, int word_index,
                        const CbrBackends& backends, const CbrConfig& config) {
    const std::string text = strip_spaces(word.text);
    const int n = static_cast<int>(text.size());
    if (n == 0) throw Error(ErrorCode::RefinementFailed, "empty transcription");
    const BBox word_box = clamp_to(enclosing_bbox(word.quad), image.width, image.height);
    if (word_box.empty()) throw Error(ErrorCode::RefinementFailed, "word box lies outside the image");
    const ReadingAxis axis = reading_axis(word.quad);

    RefinedWord result;
    auto finish = [&](const std::vector<CharAssignment>& assigned) {
        result.chars.clear();
        for (const CharAssignment& a : assigned) {
            const BBox b = intersect(a.box, word_box);
            if (b.empty()) return false;
            result.chars.push_back({b, a.category, word_index, a.char_index});
        }
        return true;
    };
    auto proportional = [&](const std::string& why) {
        result.fallback_used = true;
        result.note = why;
        std::vector<CharAssignment> assigned;
        const auto slices = proportional_split(word_box, n, axis);
        for (int j = 0; j < n; ++j) assigned.push_back({slices[static_cast<std::size_t>(j)], j, text[static_cast<std::size_t>(j)]});
        if (!finish(assigned)) {
            throw Error(ErrorCode::RefinementFailed, "word box too small for " + std::to_string(n) + " characters");
        }
        return result;
    };
    auto read = [&](const std::vector<BBox>& boxes) {
        std::vector<RecognitionResult> out;
        if (!backends.recognizer) return out;
        for (const BBox& b : boxes) {
            out.push_back(backends.recognizer->recognize(image, clamp_to(pad(b, config.crop_padding), image.width, image.height)));
        }
        return out;
    };

    std::vector<DetectedBox> detected;
    for (DetectedBox d : backends.detector.detect_chars(image, word_box)) {
        if (d.confidence < config.min_confidence) continue;
        d.bbox = intersect(d.bbox, word_box);
        if (!d.bbox.empty()) detected.push_back(d);
    }
    if (detected.empty()) return proportional("detector found no characters");
    {
        std::vector<std::size_t> idx(detected.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double pa = dot(detected[a].bbox.center(), axis.direction);
            const double pb = dot(detected[b].bbox.center(), axis.direction);
            if (pa != pb) return pa < pb;
            return Point{detected[a].bbox.x_min, detected[a].bbox.y_min} < Point{detected[b].bbox.x_min, detected[b].bbox.y_min};
        });
        std::vector<DetectedBox> sorted;
        for (std::size_t i : idx) sorted.push_back(detected[i]);
        detected = std::move(sorted);
    }

    std::vector<BBox> boxes;
    for (const auto& d : detected) boxes.push_back(d.bbox);
    std::vector<RecognitionResult> recognized = read(boxes);

    if (static_cast<int>(boxes.size()) < n) {
        std::vector<TextSegment> segments;
        try {
            segments = detect_merges(detected, text, recognized);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AlignmentFailed) throw;
            return proportional(e.what());
        }
        std::vector<BBox> split;
        std::vector<RecognitionResult> split_read;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            const int k = static_cast<int>(segments[s].text.size());
            if (k == 1) {
                split.push_back(segments[s].bbox);
                if (!recognized.empty()) split_read.push_back(recognized[s]);
                continue;
            }
            bool fell_back = false;
            const auto parts = split_merged(image, segments[s].bbox, k, backends.segmenter, axis, &fell_back);
            if (fell_back) {
                result.fallback_used = true;
                result.note = "merged box split into equal slices";
            }
            const auto parts_read = read(parts);
            split.insert(split.end(), parts.begin(), parts.end());
            split_read.insert(split_read.end(), parts_read.begin(), parts_read.end());
        }
        boxes = std::move(split);
        recognized = std::move(split_read);
    }

    const auto assigned = assign_categories(boxes, text, recognized, config.cost, axis);
    if (!finish(assigned)) return proportional("refined box fell outside the word box");
    return result;
}

}  // namespace glyphseg
