#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pidkit/geometry.hpp"

namespace pidkit {

struct Detection {
    BBox box;
    double confidence = 0.0;
};

/// Thresholds for the masking-stage judgment.
struct JudgeConfig {
    std::int64_t p_t = 20;  ///< overlap-pixel threshold (strict >)
    double c_t = 0.8;       ///< confidence threshold (strict >)
};

struct Verdict {
    Detection detection;
    std::int64_t overlap_pixels = 0;
    bool intruding = false;
};

/// Counts the detection box's set AoI pixels; intruding iff overlap > p_t.
Verdict judge_intrusion(const Detection& det, const BinaryMask& mask,
                        const JudgeConfig& cfg);
Verdict judge_intrusion(const BBox& box, const BinaryMask& mask,
                        const JudgeConfig& cfg);

/// Drops detections with confidence <= c_t, then judges the survivors in
/// order. Equals mapping judge_intrusion over filter_by_confidence.
std::vector<Verdict> annotate_frame(std::span<const Detection> detections,
                                    const BinaryMask& mask, const JudgeConfig& cfg);

}  // namespace pidkit
