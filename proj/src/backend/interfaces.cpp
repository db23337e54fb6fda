#include "glyphseg/backend/interfaces.hpp"

#include <cmath>

#include "glyphseg/error.hpp"

namespace glyphseg {

void validate_response(const SegmentResponse& response, const BBox& box) {
    const int w = box.width(), h = box.height();
    if (response.mask.width() != w || response.mask.height() != h) {
        throw Error(ErrorCode::ProtocolError, "segment mask is " + std::to_string(response.mask.width()) + "x" +
                                                  std::to_string(response.mask.height()) + ", expected " +
                                                  std::to_string(w) + "x" + std::to_string(h));
    }
    if (!response.logits.same_shape(ScoreMap(w, h))) {
        throw Error(ErrorCode::ProtocolError, "segment logits do not match the box");
    }
    for (std::size_t i = 0; i < response.mask.size(); ++i) {
        const float v = response.logits[i];
        if (!std::isfinite(v)) throw Error(ErrorCode::ProtocolError, "non-finite logit");
        if ((response.mask[i] != 0) != (v > 0.0f)) {
            throw Error(ErrorCode::ProtocolError, "mask disagrees with logits > 0");
        }
    }
    if (!(response.score >= 0.0 && response.score <= 1.0)) {
        throw Error(ErrorCode::ProtocolError, "segment score outside [0, 1]");
    }
}

}  // namespace glyphseg
