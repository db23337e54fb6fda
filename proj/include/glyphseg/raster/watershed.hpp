#pragma once

#include <vector>

#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

struct Marker {
    Point at;
    float score = 0.0f;
};

/// Suppression radius used for marker NMS: max(2, ceil(domain_width / 2k)).
int marker_nms_radius(int domain_width, int k);

/// Plateau maxima of `scores` inside `domain`: each maximal connected
/// plateau with no strictly higher 8-neighbour in the domain contributes
/// one candidate (its first pixel in row-major order). Sorted by descending
/// score, ties row-major.
std::vector<Marker> plateau_maxima(const ScoreMap& scores, const BitMask& domain);

/// Chooses k watershed markers. Connected regions of positive score are
/// visited largest first and each donates its best maximum; the remaining
/// slots are filled from the ranked maxima with chessboard NMS at
/// `marker_nms_radius`. Throws InsufficientPeaks when fewer than k survive.
std::vector<Marker> select_markers(const ScoreMap& scores, const BitMask& domain, int k);

/// Marker-based watershed of the negated scores restricted to `domain`.
/// Returns a LabelMap whose labels 1..k are nonempty, disjoint and cover the
/// domain exactly (0 outside it). Label i is seeded by the i-th marker in
/// select_markers order. Flooding pops pixels by descending score; equal
/// scores pop first-come, and neighbours are pushed in row-major order.
/// Domain pieces unreachable from every marker join the region of the
/// nearest marker (squared Euclidean, lower label on ties).
LabelMap watershed_partition(const ScoreMap& scores, const BitMask& domain, int k);

}  // namespace glyphseg
