#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pidkit/geometry.hpp"

namespace pidkit {

struct GroundTruthCase {
    BBox box;
    bool intrusion = false;
};

/// Detection with its AoI overlap already counted against the frame mask.
struct JudgedDetection {
    BBox box;
    double confidence = 0.0;
    std::int64_t overlap_pixels = 0;
};

enum class AccFormula { Corrected, Literal };

std::vector<double> default_recall_levels();  // {0/10, 1/10, ..., 10/10}

struct EvalConfig {
    double iou_threshold = 0.5;                       ///< match eligibility >=, tp needs strict >
    double c_t = 0.8;                                 ///< fixed confidence gate (strict >)
    std::int64_t p_t = 20;                            ///< overlap gate (strict >)
    std::vector<std::int64_t> p_t_set = {20};         ///< overlap gates averaged by pid_map
    std::vector<double> recall_levels = default_recall_levels();
    AccFormula acc_formula = AccFormula::Corrected;
};

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0, total = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        total += o.total;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;
};

struct PrPoint {
    double recall = 0.0, precision = 0.0, confidence = 0.0;
    bool operator==(const PrPoint&) const = default;
};

struct EvalReport {
    std::vector<std::pair<std::int64_t, double>> ap_per_pt;  ///< (p_t, PID_AP)
    double pid_map = 0.0;
    double pid_acc = 0.0;
    ConfusionCounts counts;                                  ///< at the fixed c_t/p_t
    std::vector<PrPoint> pr_curve;                           ///< sweep at cfg.p_t, threshold desc
    bool operator==(const EvalReport&) const = default;
};

/// One frame's evaluation inputs.
struct FrameEval {
    std::vector<JudgedDetection> detections;
    std::vector<GroundTruthCase> gts;
};

/**
 * @brief Confusion counts for one frame at fixed thresholds.
 *
 * Detections with confidence > c_t, taken in (confidence desc, x_min, y_min,
 * x_max, y_max) order, greedily claim the unmatched groundtruth of highest
 * IoU among those with IoU >= iou_threshold. A matched detection is tp iff
 * the groundtruth is an intrusion case, IoU > iou_threshold, and overlap >
 * p_t; a flagged detection (overlap > p_t) that is not a tp is fp. Intrusion
 * groundtruths without a tp count fn; no-intrusion groundtruths with no
 * flagged detection matched to them count tn.
 */
ConfusionCounts match_detections(std::span<const JudgedDetection> dets,
                                 std::span<const GroundTruthCase> gts,
                                 const EvalConfig& cfg);

/**
 * @brief 11-point interpolated average precision under the strict tp rule.
 *
 * The confidence threshold sweeps every distinct detection confidence plus
 * {0, 1}; precision at an empty operating point is 1 by convention. Throws
 * std::invalid_argument when the frames contain no intrusion groundtruth
 * (recall undefined).
 */
double pid_ap(std::span<const FrameEval> frames, const EvalConfig& cfg,
              std::int64_t p_t);

/// Mean of pid_ap over cfg.p_t_set (throws on an empty set).
double pid_map(std::span<const FrameEval> frames, const EvalConfig& cfg);

/// Corrected: (tp+tn)/total; Literal: (tp+fn)/total. Returns 0 when there
/// are no groundtruth cases at all.
double pid_acc(std::span<const FrameEval> frames, const EvalConfig& cfg);

/// Full report: AP per p_t in p_t_set, their mean, accuracy, fixed-threshold
/// counts, and the PR sweep at cfg.p_t.
EvalReport evaluate(std::span<const FrameEval> frames, const EvalConfig& cfg);

/// Operating points of the confidence sweep at the given p_t, threshold
/// descending. Exposed for PR-curve dumps.
std::vector<PrPoint> pr_sweep(std::span<const FrameEval> frames,
                              const EvalConfig& cfg, std::int64_t p_t);

// --- report serialization -------------------------------------------------

enum class ReportFormat { Text, Csv, Records };

std::string emit_report(const EvalReport& report, ReportFormat format);

/// Inverse of emit_report(..., Csv); exact for round-tripped reports.
EvalReport parse_report_csv(const std::string& text);

/// Checks a Records-format report against its schema; returns false and
/// fills *error (when given) on the first violation.
bool validate_report_records(const std::string& json_text, std::string* error = nullptr);

/// "confidence,recall,precision" CSV dump of the report's PR curve.
std::string pr_curve_csv(const EvalReport& report);

}  // namespace pidkit
