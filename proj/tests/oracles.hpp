#pragma once

// Reference implementations used to check the library: written as plain
// brute-force routes, sharing no code with the paths they verify.

#include <algorithm>
#include <set>
#include <vector>

#include "pidkit/arch.hpp"
#include "pidkit/detection.hpp"
#include "pidkit/metrics.hpp"
#include "pidkit/random.hpp"
#include "test_util.hpp"

namespace pidkit::oracle {

// Confusion counts re-derived from scratch at one confidence threshold.
inline ConfusionCounts counts_at(const std::vector<FrameEval>& frames,
                                 double c_thresh, double iou_th, std::int64_t p_t) {
    ConfusionCounts counts;
    for (const FrameEval& frame : frames) {
        counts.total += static_cast<std::int64_t>(frame.gts.size());
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < frame.detections.size(); ++i) {
            if (frame.detections[i].confidence > c_thresh) order.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const JudgedDetection& da = frame.detections[a];
            const JudgedDetection& db = frame.detections[b];
            if (da.confidence != db.confidence) return da.confidence > db.confidence;
            if (da.box.x_min != db.box.x_min) return da.box.x_min < db.box.x_min;
            if (da.box.y_min != db.box.y_min) return da.box.y_min < db.box.y_min;
            if (da.box.x_max != db.box.x_max) return da.box.x_max < db.box.x_max;
            return da.box.y_max < db.box.y_max;
        });
        std::vector<bool> gt_used(frame.gts.size(), false);
        std::vector<bool> gt_tp(frame.gts.size(), false);
        std::vector<bool> gt_flagged(frame.gts.size(), false);
        for (std::size_t i : order) {
            const JudgedDetection& det = frame.detections[i];
            int match = -1;
            double best = -1.0;
            for (std::size_t g = 0; g < frame.gts.size(); ++g) {
                if (gt_used[g]) continue;
                const double iou = bbox_iou(det.box, frame.gts[g].box);
                if (iou >= iou_th && iou > best) {
                    best = iou;
                    match = static_cast<int>(g);
                }
            }
            const bool flagged = det.overlap_pixels > p_t;
            bool is_tp = false;
            if (match >= 0) {
                gt_used[static_cast<std::size_t>(match)] = true;
                if (flagged) gt_flagged[static_cast<std::size_t>(match)] = true;
                is_tp = frame.gts[static_cast<std::size_t>(match)].intrusion &&
                        best > iou_th && flagged;
            }
            if (is_tp) {
                counts.tp += 1;
                gt_tp[static_cast<std::size_t>(match)] = true;
            } else if (flagged) {
                counts.fp += 1;
            }
        }
        for (std::size_t g = 0; g < frame.gts.size(); ++g) {
            if (frame.gts[g].intrusion) {
                if (!gt_tp[g]) counts.fn += 1;
            } else if (!gt_flagged[g]) {
                counts.tn += 1;
            }
        }
    }
    return counts;
}

// Brute-force 11-point AP: every subset boundary induced by the distinct
// confidences (plus 0 and 1), re-matched at each threshold.
inline double ap(const std::vector<FrameEval>& frames, const EvalConfig& cfg,
                 std::int64_t p_t) {
    std::set<double> thresholds{0.0, 1.0};
    for (const FrameEval& frame : frames) {
        for (const JudgedDetection& det : frame.detections) {
            thresholds.insert(det.confidence);
        }
    }
    std::vector<std::pair<double, double>> points;  // (recall, precision)
    for (double t : thresholds) {
        const ConfusionCounts c = counts_at(frames, t, cfg.iou_threshold, p_t);
        const double re =
            c.tp + c.fn > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
        const double pr = c.tp + c.fp > 0 ? double(c.tp) / double(c.tp + c.fp) : 1.0;
        points.emplace_back(re, pr);
    }
    double sum = 0.0;
    for (double level : cfg.recall_levels) {
        double best = 0.0;
        for (const auto& [re, pr] : points) {
            if (re >= level && pr > best) best = pr;
        }
        sum += best;
    }
    return sum / double(cfg.recall_levels.size());
}

// Random evaluation instance with >= 1 intrusion groundtruth; confidences
// snapped to a grid so ties occur.
inline std::vector<FrameEval> random_instance(Rng& rng, int max_gts = 10,
                                              int max_dets = 15) {
    const int n_frames = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<FrameEval> frames(static_cast<std::size_t>(n_frames));
    int intrusions = 0;
    for (FrameEval& frame : frames) {
        const int n_gts = static_cast<int>(rng.uniform_int(0, max_gts / n_frames + 1));
        for (int g = 0; g < n_gts; ++g) {
            GroundTruthCase gt;
            gt.box = test::random_box(rng, 100, 100, 40);
            gt.intrusion = rng.uniform01() < 0.6;
            intrusions += gt.intrusion ? 1 : 0;
            frame.gts.push_back(gt);
        }
        const int n_dets = static_cast<int>(rng.uniform_int(0, max_dets / n_frames + 1));
        for (int d = 0; d < n_dets; ++d) {
            JudgedDetection det;
            if (!frame.gts.empty() && rng.uniform01() < 0.7) {
                const auto& gt = frame.gts[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(frame.gts.size()) - 1))];
                det.box = gt.box;
                const int jitter = static_cast<int>(rng.uniform_int(0, 12));
                det.box.x_min = std::max(0, det.box.x_min - jitter);
                det.box.y_max = std::min(100, det.box.y_max + jitter / 2);
            } else {
                det.box = test::random_box(rng, 100, 100, 40);
            }
            det.confidence = rng.uniform_int(0, 20) / 20.0;
            det.overlap_pixels = rng.uniform_int(0, 60);
            frame.detections.push_back(det);
        }
    }
    if (intrusions == 0) {
        GroundTruthCase gt;
        gt.box = test::random_box(rng, 100, 100, 40);
        gt.intrusion = true;
        frames[0].gts.push_back(gt);
    }
    return frames;
}

// Plain quadratic greedy suppression.
inline std::vector<Detection> brute_nms(std::vector<Detection> dets, double threshold,
                                        std::optional<std::size_t> max_keep) {
    std::vector<Detection> kept;
    std::vector<bool> alive(dets.size(), true);
    while (true) {
        if (max_keep && kept.size() >= *max_keep) break;
        int best = -1;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (!alive[i]) continue;
            if (best < 0 ||
                detection_before(dets[i], dets[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        const Detection pick = dets[static_cast<std::size_t>(best)];
        alive[static_cast<std::size_t>(best)] = false;
        kept.push_back(pick);
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (alive[i] && bbox_iou(pick.box, dets[i].box) > threshold) {
                alive[i] = false;
            }
        }
    }
    return kept;
}

// Parameter count by enumerating weight slots one by one.
inline std::int64_t enumerate_weights(const LayerSpec& l) {
    std::int64_t n = 0;
    switch (l.kind) {
        case LayerKind::Conv:
            for (int o = 0; o < l.out_ch; ++o) {
                for (int i = 0; i < l.in_ch; ++i) {
                    for (int a = 0; a < l.kernel; ++a) {
                        for (int b = 0; b < l.kernel; ++b) ++n;
                    }
                }
            }
            if (l.has_bias) {
                for (int o = 0; o < l.out_ch; ++o) ++n;
            }
            return n;
        case LayerKind::DepthwiseConv:
            for (int c = 0; c < l.in_ch; ++c) {
                for (int a = 0; a < l.kernel; ++a) {
                    for (int b = 0; b < l.kernel; ++b) ++n;
                }
            }
            if (l.has_bias) {
                for (int c = 0; c < l.in_ch; ++c) ++n;
            }
            return n;
        case LayerKind::PointwiseConv:
        case LayerKind::FullyConnected:
            for (int o = 0; o < l.out_ch; ++o) {
                for (int i = 0; i < l.in_ch; ++i) ++n;
            }
            if (l.has_bias) {
                for (int o = 0; o < l.out_ch; ++o) ++n;
            }
            return n;
        case LayerKind::BatchNorm:
            for (int c = 0; c < l.out_ch; ++c) n += 2;
            return n;
        case LayerKind::Pooling:
            return 0;
    }
    return -1;
}

}  // namespace pidkit::oracle
