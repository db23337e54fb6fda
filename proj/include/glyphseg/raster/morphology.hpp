#pragma once

#include <vector>

#include "glyphseg/raster/raster.hpp"

namespace glyphseg {

enum class Connectivity { Four = 4, Eight = 8 };

struct Component {
    int label = 0;  // 1-based, matches the LabelMap value
    std::int64_t area = 0;
    BBox box;
    Point first;    // first pixel in row-major order
};

struct Components {
    LabelMap labels;
    std::vector<Component> items;  // descending area, ties by first pixel
};

/// Labels the foreground. Label i+1 belongs to items[i], so labels are
/// contiguous and ordered by descending component area.
Components connected_components(const BitMask& mask, Connectivity connectivity = Connectivity::Eight);

/// Background pixels 4-connected to a border background pixel.
BitMask flood_from_border(const BitMask& mask);

/// Background pixels enclosed by foreground (the complement of the flood).
BitMask hole_mask(const BitMask& mask);

/// Chessboard distance to the nearest background pixel. Pixels outside the
/// raster count as background, so a lone pixel scores 1.
ScoreMap distance_transform(const BitMask& mask);

/// +distance_transform inside the mask, -distance to the mask outside it, so
/// the mask is exactly the positive part.
ScoreMap signed_distance(const BitMask& mask);

}  // namespace glyphseg
