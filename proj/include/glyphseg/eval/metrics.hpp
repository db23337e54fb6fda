#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

struct PixelTally {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    PixelTally& operator+=(const PixelTally& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend PixelTally operator+(PixelTally a, const PixelTally& b) { return a += b; }
    friend bool operator==(const PixelTally&, const PixelTally&) = default;
};

/// Foreground is the positive class. Throws ShapeMismatch.
PixelTally tally(const BitMask& pred, const BitMask& gt);

struct Metrics {
    double fg_iou = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

/// fgIoU = tp/(tp+fp+fn), 1 when nothing is foreground in either mask.
/// Precision and recall are 1 on an empty denominator when the other error
/// count is also 0, else 0; F is 0 when P + R is 0.
Metrics metrics(const PixelTally& t);

struct ImageScore {
    std::string id;
    PixelTally tally;
    Metrics metrics;
};

struct EvalReport {
    std::vector<ImageScore> images;
    PixelTally total;
    Metrics global;  // from the summed tally
};

struct NamedTally {
    std::string id;
    PixelTally tally;
};

/// Throws EmptyInput for no tallies.
EvalReport make_report(const std::vector<NamedTally>& tallies);

/// JSON: {fg_iou, precision, recall, f_score, tally:{tp,fp,fn,tn},
///        images:[{id, fg_iou, precision, recall, f_score, tally}]}
std::string report_json(const EvalReport& report, int indent = 2);

/// Pairs <id>.png files of the two directories. A directory holding a
/// masks/ subdirectory (an export) is read from there. Throws MissingPair
/// naming the first id present on one side only, ShapeMismatch, EmptyInput.
EvalReport evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

}  // namespace glyphseg
