#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pidkit/intrusion.hpp"

namespace pidkit {

/// w:h aspect ratio of an anchor box.
struct AspectRatio {
    double w = 1.0;
    double h = 1.0;
    double value() const { return w / h; }
};

/**
 * @brief Anchor layout: |scales| x |ratios| boxes per feature-grid cell.
 *
 * Defaults are five areas {32^2 .. 512^2} and five w:h ratios
 * {1:2, 2:3, 1:1, 3:2, 2:1} — 25 anchors per location, the tall ratios
 * covering standing pedestrians.
 */
struct AnchorConfig {
    std::vector<double> scales = {32.0 * 32, 64.0 * 64, 128.0 * 128,
                                  256.0 * 256, 512.0 * 512};
    std::vector<AspectRatio> ratios = {{1, 2}, {2, 3}, {1, 1}, {3, 2}, {2, 1}};
    int stride = 16;
};

/// Side lengths for one (scale, ratio): w = round(sqrt(scale*r)),
/// h = round(sqrt(scale/r)), preserving area within rounding.
std::pair<int, int> anchor_size(double scale, double w_over_h);

/// Anchors centered on every cell center ((i+0.5)s, (j+0.5)s), clipped to
/// the grid_w*s x grid_h*s image; clipping-degenerate boxes are dropped.
/// Throws std::invalid_argument on empty scale/ratio lists or bad dims.
std::vector<BBox> generate_anchors(const AnchorConfig& cfg, int grid_w, int grid_h);

struct NmsConfig {
    double iou_threshold = 0.7;
    std::optional<std::size_t> max_keep;
};

/// Greedy suppression: keep the highest-confidence remaining detection,
/// discard the rest with IoU > threshold against it. Ties break by
/// (confidence desc, x_min, y_min, x_max, y_max); output is confidence-sorted.
std::vector<Detection> nms(std::vector<Detection> dets, const NmsConfig& cfg);

/// Order-preserving subset with confidence strictly greater than c_t.
std::vector<Detection> filter_by_confidence(std::span<const Detection> dets,
                                            double c_t);

/// One {"x0","y0","x1","y1"} object per line, the annotation box format.
void write_anchor_dump(std::ostream& out, std::span<const BBox> anchors);

/// Total order used for confidence ties throughout detection and matching.
bool detection_before(const Detection& a, const Detection& b);

}  // namespace pidkit
