#include "pidkit/intrusion.hpp"

namespace pidkit {

Verdict judge_intrusion(const Detection& det, const BinaryMask& mask,
                        const JudgeConfig& cfg) {
    Verdict v;
    v.detection = det;
    v.overlap_pixels = bbox_mask_overlap(det.box, mask);
    v.intruding = v.overlap_pixels > cfg.p_t;
    return v;
}

Verdict judge_intrusion(const BBox& box, const BinaryMask& mask,
                        const JudgeConfig& cfg) {
    return judge_intrusion(Detection{box, 1.0}, mask, cfg);
}

std::vector<Verdict> annotate_frame(std::span<const Detection> detections,
                                    const BinaryMask& mask, const JudgeConfig& cfg) {
    std::vector<Verdict> verdicts;
    verdicts.reserve(detections.size());
    for (const Detection& det : detections) {
        if (!(det.confidence > cfg.c_t)) continue;
        verdicts.push_back(judge_intrusion(det, mask, cfg));
    }
    return verdicts;
}

}  // namespace pidkit
