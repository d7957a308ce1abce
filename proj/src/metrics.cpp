#include "pidkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace pidkit {

std::vector<double> default_recall_levels() {
    std::vector<double> levels(11);
    for (int i = 0; i <= 10; ++i) levels[static_cast<std::size_t>(i)] = i / 10.0;
    return levels;
}

namespace {

bool judged_before(const JudgedDetection& a, const JudgedDetection& b) {
    return std::tuple(-a.confidence, a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max) <
           std::tuple(-b.confidence, b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
}

struct MatchedDet {
    double confidence = 0.0;
    std::int64_t overlap = 0;
    int gt_index = -1;    // -1: unmatched
    double iou = 0.0;
};

// Greedy one-to-one assignment in confidence order over detections with
// confidence > floor. A detection's match never depends on lower-confidence
// detections, so the assignment at any higher threshold is the restriction
// of this one.
std::vector<MatchedDet> greedy_match(std::span<const JudgedDetection> dets,
                                     std::span<const GroundTruthCase> gts,
                                     double iou_threshold, double confidence_floor) {
    std::vector<const JudgedDetection*> order;
    order.reserve(dets.size());
    for (const JudgedDetection& d : dets) {
        if (d.confidence > confidence_floor) order.push_back(&d);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const JudgedDetection* a, const JudgedDetection* b) {
                         return judged_before(*a, *b);
                     });
    std::vector<bool> gt_taken(gts.size(), false);
    std::vector<MatchedDet> out;
    out.reserve(order.size());
    for (const JudgedDetection* d : order) {
        MatchedDet m;
        m.confidence = d->confidence;
        m.overlap = d->overlap_pixels;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g]) continue;
            const double iou = bbox_iou(d->box, gts[g].box);
            if (iou >= iou_threshold && iou > best_iou) {
                best_iou = iou;
                m.gt_index = static_cast<int>(g);
                m.iou = iou;
            }
        }
        if (m.gt_index >= 0) gt_taken[static_cast<std::size_t>(m.gt_index)] = true;
        out.push_back(m);
    }
    return out;
}

}  // namespace

ConfusionCounts match_detections(std::span<const JudgedDetection> dets,
                                 std::span<const GroundTruthCase> gts,
                                 const EvalConfig& cfg) {
    const auto matched = greedy_match(dets, gts, cfg.iou_threshold, cfg.c_t);
    ConfusionCounts counts;
    counts.total = static_cast<std::int64_t>(gts.size());
    std::vector<bool> gt_has_tp(gts.size(), false);
    std::vector<bool> gt_flagged(gts.size(), false);
    for (const MatchedDet& m : matched) {
        const bool flagged = m.overlap > cfg.p_t;
        const bool is_tp = m.gt_index >= 0 &&
                           gts[static_cast<std::size_t>(m.gt_index)].intrusion &&
                           m.iou > cfg.iou_threshold && flagged;
        if (is_tp) {
            ++counts.tp;
            gt_has_tp[static_cast<std::size_t>(m.gt_index)] = true;
        } else if (flagged) {
            ++counts.fp;
        }
        if (flagged && m.gt_index >= 0) {
            gt_flagged[static_cast<std::size_t>(m.gt_index)] = true;
        }
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (gts[g].intrusion) {
            if (!gt_has_tp[g]) ++counts.fn;
        } else {
            if (!gt_flagged[g]) ++counts.tn;
        }
    }
    return counts;
}

namespace {

struct SweepLabel {
    double confidence = 0.0;
    bool tp = false;
    bool fp = false;
};

// Per-detection tp/fp labels from the single global matching (valid at every
// swept threshold thanks to the greedy prefix property), plus the intrusion
// groundtruth count.
std::pair<std::vector<SweepLabel>, std::int64_t> sweep_labels(
    std::span<const FrameEval> frames, const EvalConfig& cfg, std::int64_t p_t) {
    std::vector<SweepLabel> labels;
    std::int64_t npos = 0;
    for (const FrameEval& frame : frames) {
        for (const GroundTruthCase& gt : frame.gts) {
            if (gt.intrusion) ++npos;
        }
        const auto matched = greedy_match(frame.detections, frame.gts,
                                          cfg.iou_threshold, 0.0);
        for (const MatchedDet& m : matched) {
            SweepLabel lbl;
            lbl.confidence = m.confidence;
            const bool flagged = m.overlap > p_t;
            lbl.tp = m.gt_index >= 0 &&
                     frame.gts[static_cast<std::size_t>(m.gt_index)].intrusion &&
                     m.iou > cfg.iou_threshold && flagged;
            lbl.fp = flagged && !lbl.tp;
            labels.push_back(lbl);
        }
    }
    return {std::move(labels), npos};
}

}  // namespace

std::vector<PrPoint> pr_sweep(std::span<const FrameEval> frames,
                              const EvalConfig& cfg, std::int64_t p_t) {
    auto [labels, npos] = sweep_labels(frames, cfg, p_t);
    std::sort(labels.begin(), labels.end(),
              [](const SweepLabel& a, const SweepLabel& b) {
                  return a.confidence > b.confidence;
              });
    std::set<double, std::greater<double>> thresholds{0.0, 1.0};
    for (const SweepLabel& lbl : labels) thresholds.insert(lbl.confidence);

    std::vector<PrPoint> points;
    points.reserve(thresholds.size());
    std::int64_t tp = 0, fp = 0;
    std::size_t next = 0;
    for (double t : thresholds) {
        // accumulate every labeled detection with confidence strictly above t
        while (next < labels.size() && labels[next].confidence > t) {
            tp += labels[next].tp ? 1 : 0;
            fp += labels[next].fp ? 1 : 0;
            ++next;
        }
        PrPoint p;
        p.confidence = t;
        p.recall = npos > 0 ? static_cast<double>(tp) / static_cast<double>(npos) : 0.0;
        p.precision = (tp + fp) == 0
                          ? 1.0
                          : static_cast<double>(tp) / static_cast<double>(tp + fp);
        points.push_back(p);
    }
    return points;
}

double pid_ap(std::span<const FrameEval> frames, const EvalConfig& cfg,
              std::int64_t p_t) {
    std::int64_t npos = 0;
    for (const FrameEval& frame : frames) {
        for (const GroundTruthCase& gt : frame.gts) {
            if (gt.intrusion) ++npos;
        }
    }
    if (npos == 0) {
        throw std::invalid_argument(
            "pid_ap: no intrusion groundtruth cases; recall undefined");
    }
    if (cfg.recall_levels.empty()) {
        throw std::invalid_argument("pid_ap: recall_levels must be non-empty");
    }
    for (std::size_t i = 0; i < cfg.recall_levels.size(); ++i) {
        const double level = cfg.recall_levels[i];
        if (level < 0.0 || level > 1.0 ||
            (i > 0 && level <= cfg.recall_levels[i - 1])) {
            throw std::invalid_argument(
                "pid_ap: recall_levels must increase strictly within [0,1]");
        }
    }
    const std::vector<PrPoint> points = pr_sweep(frames, cfg, p_t);
    double sum = 0.0;
    for (double level : cfg.recall_levels) {
        double best = 0.0;
        for (const PrPoint& p : points) {
            if (p.recall >= level) best = std::max(best, p.precision);
        }
        sum += best;
    }
    return sum / static_cast<double>(cfg.recall_levels.size());
}

double pid_map(std::span<const FrameEval> frames, const EvalConfig& cfg) {
    if (cfg.p_t_set.empty()) {
        throw std::invalid_argument("pid_map: p_t_set must be non-empty");
    }
    double sum = 0.0;
    for (std::int64_t p_t : cfg.p_t_set) sum += pid_ap(frames, cfg, p_t);
    return sum / static_cast<double>(cfg.p_t_set.size());
}

double pid_acc(std::span<const FrameEval> frames, const EvalConfig& cfg) {
    ConfusionCounts counts;
    for (const FrameEval& frame : frames) {
        counts += match_detections(frame.detections, frame.gts, cfg);
    }
    if (counts.total == 0) return 0.0;
    const std::int64_t numer =
        cfg.acc_formula == AccFormula::Corrected ? counts.tp + counts.tn
                                                 : counts.tp + counts.fn;
    return static_cast<double>(numer) / static_cast<double>(counts.total);
}

EvalReport evaluate(std::span<const FrameEval> frames, const EvalConfig& cfg) {
    EvalReport report;
    for (std::int64_t p_t : cfg.p_t_set) {
        report.ap_per_pt.emplace_back(p_t, pid_ap(frames, cfg, p_t));
    }
    report.pid_map = pid_map(frames, cfg);
    report.pid_acc = pid_acc(frames, cfg);
    for (const FrameEval& frame : frames) {
        report.counts += match_detections(frame.detections, frame.gts, cfg);
    }
    report.pr_curve = pr_sweep(frames, cfg, cfg.p_t);
    return report;
}

// --- report serialization -------------------------------------------------

namespace {

std::string fmt_double(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Text: {
            out << "PID_mAP: " << fmt_double(report.pid_map, "%.6f") << '\n';
            out << "PID_Acc: " << fmt_double(report.pid_acc, "%.6f") << '\n';
            for (const auto& [pt, ap] : report.ap_per_pt) {
                out << "PID_AP[p_t=" << pt << "]: " << fmt_double(ap, "%.6f") << '\n';
            }
            out << "tp: " << report.counts.tp << '\n';
            out << "fp: " << report.counts.fp << '\n';
            out << "fn: " << report.counts.fn << '\n';
            out << "tn: " << report.counts.tn << '\n';
            out << "total: " << report.counts.total << '\n';
            return out.str();
        }
        case ReportFormat::Csv: {
            out << "metric,value\n";
            out << "pid_map," << fmt_double(report.pid_map) << '\n';
            out << "pid_acc," << fmt_double(report.pid_acc) << '\n';
            out << "tp," << report.counts.tp << '\n';
            out << "fp," << report.counts.fp << '\n';
            out << "fn," << report.counts.fn << '\n';
            out << "tn," << report.counts.tn << '\n';
            out << "total," << report.counts.total << '\n';
            for (const auto& [pt, ap] : report.ap_per_pt) {
                out << "ap@" << pt << ',' << fmt_double(ap) << '\n';
            }
            for (const PrPoint& p : report.pr_curve) {
                out << "pr," << fmt_double(p.confidence) << ';'
                    << fmt_double(p.recall) << ';' << fmt_double(p.precision) << '\n';
            }
            return out.str();
        }
        case ReportFormat::Records: {
            nlohmann::ordered_json j;
            j["pid_map"] = report.pid_map;
            j["pid_acc"] = report.pid_acc;
            j["counts"] = {{"tp", report.counts.tp},
                           {"fp", report.counts.fp},
                           {"fn", report.counts.fn},
                           {"tn", report.counts.tn},
                           {"total", report.counts.total}};
            auto& ap = j["ap"] = nlohmann::ordered_json::array();
            for (const auto& [pt, value] : report.ap_per_pt) {
                ap.push_back({{"p_t", pt}, {"ap", value}});
            }
            auto& curve = j["pr_curve"] = nlohmann::ordered_json::array();
            for (const PrPoint& p : report.pr_curve) {
                curve.push_back({{"confidence", p.confidence},
                                 {"recall", p.recall},
                                 {"precision", p.precision}});
            }
            return j.dump() + "\n";
        }
    }
    throw std::invalid_argument("emit_report: unknown format");
}

EvalReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "metric,value") {
        throw std::invalid_argument("report csv: missing metric,value header");
    }
    EvalReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("report csv: bad row: " + line);
        }
        const std::string key = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (key == "pid_map") {
            report.pid_map = std::stod(value);
        } else if (key == "pid_acc") {
            report.pid_acc = std::stod(value);
        } else if (key == "tp") {
            report.counts.tp = std::stoll(value);
        } else if (key == "fp") {
            report.counts.fp = std::stoll(value);
        } else if (key == "fn") {
            report.counts.fn = std::stoll(value);
        } else if (key == "tn") {
            report.counts.tn = std::stoll(value);
        } else if (key == "total") {
            report.counts.total = std::stoll(value);
        } else if (key.rfind("ap@", 0) == 0) {
            report.ap_per_pt.emplace_back(std::stoll(key.substr(3)), std::stod(value));
        } else if (key == "pr") {
            PrPoint p;
            std::istringstream fields(value);
            std::string tok;
            if (!std::getline(fields, tok, ';')) throw std::invalid_argument("pr row");
            p.confidence = std::stod(tok);
            if (!std::getline(fields, tok, ';')) throw std::invalid_argument("pr row");
            p.recall = std::stod(tok);
            if (!std::getline(fields, tok, ';')) throw std::invalid_argument("pr row");
            p.precision = std::stod(tok);
            report.pr_curve.push_back(p);
        } else {
            throw std::invalid_argument("report csv: unknown metric: " + key);
        }
    }
    return report;
}

bool validate_report_records(const std::string& json_text, std::string* error) {
    const auto fail = [&](const std::string& msg) {
        if (error) *error = msg;
        return false;
    };
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) return fail("not valid json");
    if (!j.is_object()) return fail("top level must be an object");
    for (const char* key : {"pid_map", "pid_acc"}) {
        if (!j.contains(key) || !j[key].is_number()) {
            return fail(std::string(key) + " must be a number");
        }
        const double v = j[key].get<double>();
        if (v < 0.0 || v > 1.0) return fail(std::string(key) + " out of [0,1]");
    }
    if (!j.contains("counts") || !j["counts"].is_object()) {
        return fail("counts must be an object");
    }
    for (const char* key : {"tp", "fp", "fn", "tn", "total"}) {
        const auto& c = j["counts"];
        if (!c.contains(key) || !c[key].is_number_integer() || c[key].get<std::int64_t>() < 0) {
            return fail(std::string("counts.") + key + " must be a non-negative integer");
        }
    }
    if (!j.contains("ap") || !j["ap"].is_array()) return fail("ap must be an array");
    for (const auto& entry : j["ap"]) {
        if (!entry.is_object() || !entry.contains("p_t") || !entry.contains("ap") ||
            !entry["p_t"].is_number_integer() || !entry["ap"].is_number()) {
            return fail("ap entries must be {p_t: int, ap: number}");
        }
        const double v = entry["ap"].get<double>();
        if (v < 0.0 || v > 1.0) return fail("ap value out of [0,1]");
    }
    if (!j.contains("pr_curve") || !j["pr_curve"].is_array()) {
        return fail("pr_curve must be an array");
    }
    for (const auto& entry : j["pr_curve"]) {
        for (const char* key : {"confidence", "recall", "precision"}) {
            if (!entry.is_object() || !entry.contains(key) || !entry[key].is_number()) {
                return fail(std::string("pr_curve entries need numeric ") + key);
            }
            const double v = entry[key].get<double>();
            if (v < 0.0 || v > 1.0) return fail(std::string("pr_curve ") + key + " out of [0,1]");
        }
    }
    return true;
}

std::string pr_curve_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "confidence,recall,precision\n";
    for (const PrPoint& p : report.pr_curve) {
        out << fmt_double(p.confidence) << ',' << fmt_double(p.recall) << ','
            << fmt_double(p.precision) << '\n';
    }
    return out.str();
}

}  // namespace pidkit
