#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "glyphseg/backend/interfaces.hpp"
#include "glyphseg/io/annotation.hpp"

namespace glyphseg {

/// Unit reading direction of a word plus the projection onto [0, 1].
struct ReadingAxis {
    Vec2 direction{1.0, 0.0};
    double start = 0.0;   // projection of the quad's first corner along direction
    double length = 1.0;  // extent of the quad along direction

    bool horizontal() const { return std::abs(direction.x) >= std::abs(direction.y); }
    /// Normalised position of `p` along the word, clamped to [0, 1].
    double project(Vec2 p) const;
};

/// Direction of the longer pair of opposite quad edges (ties go to the more
/// horizontal pair), signed so its dominant component is positive.
ReadingAxis reading_axis(const Quad& quad);

/// Orders boxes by the projection of their centres (ties row-major).
void sort_reading_order(std::vector<BBox>& boxes, const ReadingAxis& axis);

// ---------------------------------------------------------------------------

struct Matching {
    std::vector<int> column_of_row;
    double total = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (Hungarian
/// method with potentials). Needs rows <= columns; extra columns stay
/// unmatched. Throws InvalidArgument on ragged or non-finite input.
Matching solve_assignment(const std::vector<std::vector<double>>& cost);

struct AssignmentCost {
    double order_weight = 1.0;
    double recog_weight = 1.0;
};

struct CharAssignment {
    BBox box;
    int char_index = 0;
    char category = '?';
};

/// Matches boxes to the characters of `transcription` (spaces removed)
/// under order_weight * |pos(box) - j/(n-1)| + recog_weight * (1 - conf_j),
/// where conf_j is the recognizer's confidence when it read box i as
/// exactly character j. Pass no recognitions to drop the second term.
/// With more boxes than characters the surplus boxes are discarded.
/// Result is sorted by char_index.
std::vector<CharAssignment> assign_categories(std::span<const BBox> boxes, const std::string& transcription,
                                              std::span<const RecognitionResult> recognized,
                                              const AssignmentCost& cost, const ReadingAxis& axis);

// ---------------------------------------------------------------------------

struct TextSegment {
    BBox bbox;
    std::string text;
    bool merged() const { return text.size() > 1; }
};

/// Aligns detected boxes (in reading order) with the transcription. Each box
/// whose recognition is non-empty claims that many characters; characters
/// left over go to the remaining boxes in proportion to their width, at
/// least one each. If the claims cannot be reconciled every box is
/// apportioned by width. Throws AlignmentFailed when there are more boxes
/// than characters.
std::vector<TextSegment> detect_merges(std::span<const DetectedBox> boxes, const std::string& transcription,
                                       std::span<const RecognitionResult> recognized);

/// `k` equal slices of `box` along the reading axis.
std::vector<BBox> proportional_split(const BBox& box, int k, const ReadingAxis& axis);

/// Splits a box holding k characters: segments it with a box-only prompt,
/// partitions the logits by watershed into k regions and returns the tight
/// box of the largest ink component of each, in reading order. Falls back
/// to proportional_split when the watershed or a region comes up empty.
std::vector<BBox> split_merged(const ImageRef& image, const BBox& box, int k, Segmenter& segmenter,
                               const ReadingAxis& axis, bool* used_fallback = nullptr);

// ---------------------------------------------------------------------------

struct CbrConfig {
    double min_confidence = 0.3;  // detector floor
    AssignmentCost cost;
    double crop_padding = 0.1;  // context around recognizer crops
};

struct CbrBackends {
    CharDetector& detector;
    Recognizer* recognizer = nullptr;
    Segmenter& segmenter;
};

struct RefinedWord {
    std::vector<CharAnnotation> chars;  // one per stripped character, reading order
    bool fallback_used = false;
    std::string note;
};

/// Word box + transcription -> character boxes with categories. Backend
/// errors propagate. Throws RefinementFailed when even the proportional
/// split of the word box cannot produce a box per character.
RefinedWord refine_word(const ImageRef& image, const WordAnnotation& word, int word_index,
                        const CbrBackends& backends, const CbrConfig& config = {});

}  // namespace glyphseg
