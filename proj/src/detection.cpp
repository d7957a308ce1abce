#include "pidkit/detection.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace pidkit {

std::pair<int, int> anchor_size(double scale, double w_over_h) {
    if (scale <= 0 || w_over_h <= 0) {
        throw std::invalid_argument("anchor scale and ratio must be positive");
    }
    const int w = static_cast<int>(std::lround(std::sqrt(scale * w_over_h)));
    const int h = static_cast<int>(std::lround(std::sqrt(scale / w_over_h)));
    return {w, h};
}

std::vector<BBox> generate_anchors(const AnchorConfig& cfg, int grid_w, int grid_h) {
    if (cfg.scales.empty() || cfg.ratios.empty()) {
        throw std::invalid_argument("anchor scales and ratios must be non-empty");
    }
    if (grid_w <= 0 || grid_h <= 0 || cfg.stride < 1) {
        throw std::invalid_argument("anchor grid dims and stride must be positive");
    }
    // Per-cell shapes are cell-independent; compute once.
    std::vector<std::pair<int, int>> shapes;
    shapes.reserve(cfg.scales.size() * cfg.ratios.size());
    for (double scale : cfg.scales) {
        for (const AspectRatio& ratio : cfg.ratios) {
            shapes.push_back(anchor_size(scale, ratio.value()));
        }
    }
    const int image_w = grid_w * cfg.stride;
    const int image_h = grid_h * cfg.stride;
    std::vector<BBox> anchors;
    anchors.reserve(static_cast<std::size_t>(grid_w) * grid_h * shapes.size());
    for (int j = 0; j < grid_h; ++j) {
        for (int i = 0; i < grid_w; ++i) {
            const double cx = (i + 0.5) * cfg.stride;
            const double cy = (j + 0.5) * cfg.stride;
            for (const auto& [w, h] : shapes) {
                BBox box;
                box.x_min = static_cast<int>(std::lround(cx - w / 2.0));
                box.y_min = static_cast<int>(std::lround(cy - h / 2.0));
                box.x_max = box.x_min + w;
                box.y_max = box.y_min + h;
                box.x_min = std::clamp(box.x_min, 0, image_w);
                box.x_max = std::clamp(box.x_max, 0, image_w);
                box.y_min = std::clamp(box.y_min, 0, image_h);
                box.y_max = std::clamp(box.y_max, 0, image_h);
                if (box.x_min < box.x_max && box.y_min < box.y_max) {
                    anchors.push_back(box);
                }
            }
        }
    }
    return anchors;
}

bool detection_before(const Detection& a, const Detection& b) {
    return std::tuple(-a.confidence, a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max) <
           std::tuple(-b.confidence, b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
}

std::vector<Detection> nms(std::vector<Detection> dets, const NmsConfig& cfg) {
    if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
        throw std::invalid_argument("nms iou_threshold must be in (0, 1]");
    }
    std::stable_sort(dets.begin(), dets.end(), detection_before);
    std::vector<Detection> kept;
    std::vector<bool> suppressed(dets.size(), false);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (suppressed[i]) continue;
        kept.push_back(dets[i]);
        if (cfg.max_keep && kept.size() >= *cfg.max_keep) break;
        for (std::size_t j = i + 1; j < dets.size(); ++j) {
            if (suppressed[j]) continue;
            if (bbox_iou(dets[i].box, dets[j].box) > cfg.iou_threshold) {
                suppressed[j] = true;
            }
        }
    }
    return kept;
}

std::vector<Detection> filter_by_confidence(std::span<const Detection> dets,
                                            double c_t) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (const Detection& d : dets) {
        if (d.confidence > c_t) out.push_back(d);
    }
    return out;
}

void write_anchor_dump(std::ostream& out, std::span<const BBox> anchors) {
    for (const BBox& a : anchors) {
        out << "{\"x0\":" << a.x_min << ",\"y0\":" << a.y_min
            << ",\"x1\":" << a.x_max << ",\"y1\":" << a.y_max << "}\n";
    }
}

}  // namespace pidkit
