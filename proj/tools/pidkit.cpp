// pidkit — pedestrian-intrusion-detection toolkit CLI.
//
// Subcommands: simulate, evaluate, judge, fuse, stats, analyze-arch,
// validate, anchors. Exit codes: 0 ok, 2 malformed input, 3 semantic
// violation.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pidkit/arch.hpp"
#include "pidkit/dataset.hpp"
#include "pidkit/detection.hpp"
#include "pidkit/mask_io.hpp"
#include "pidkit/simulate.hpp"

using json = nlohmann::json;
using namespace pidkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMalformed = 2;
constexpr int kExitSemantic = 3;

struct BoxEntry {
    BBox box;
    double confidence = 1.0;
    std::string frame_id;
};

int get_int(const json& j, const char* key, int line) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
        throw MalformedError(line, std::string("missing integer field '") + key + "'");
    }
    return j[key].get<int>();
}

// One JSON object per line: {"x0","y0","x1","y1"[, "confidence"][, "frame_id"]}.
std::vector<BoxEntry> read_box_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedError(0, "cannot open " + path.string());
    std::vector<BoxEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw MalformedError(line_no, "invalid json box record");
        }
        BoxEntry entry;
        entry.box.x_min = get_int(j, "x0", line_no);
        entry.box.y_min = get_int(j, "y0", line_no);
        entry.box.x_max = get_int(j, "x1", line_no);
        entry.box.y_max = get_int(j, "y1", line_no);
        if (j.contains("confidence")) {
            if (!j["confidence"].is_number()) {
                throw MalformedError(line_no, "confidence must be a number");
            }
            entry.confidence = j["confidence"].get<double>();
            if (entry.confidence < 0.0 || entry.confidence > 1.0) {
                throw SemanticError(line_no, "confidence out of [0,1]");
            }
        }
        if (j.contains("frame_id")) {
            if (!j["frame_id"].is_string()) {
                throw MalformedError(line_no, "frame_id must be a string");
            }
            entry.frame_id = j["frame_id"].get<std::string>();
        }
        if (!entry.box.valid()) {
            throw SemanticError(line_no, "degenerate box");
        }
        entries.push_back(entry);
    }
    return entries;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    out << text;
}

ReportFormat parse_format(const std::string& name) {
    if (name == "text") return ReportFormat::Text;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "records") return ReportFormat::Records;
    throw std::invalid_argument("unknown report format: " + name);
}

// Single JSON object with the same field conventions as the dataset records;
// flags given on the command line win over config values.
json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw MalformedError(0, "cannot open config " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw MalformedError(1, "config must be a single json object");
    }
    return j;
}

template <typename T>
void config_override(const CLI::App& app, const std::string& flag, const json& cfg,
                     const char* key, T& value) {
    if (app.count(flag) > 0 || !cfg.contains(key)) return;
    value = cfg[key].get<T>();
}

std::string format_params_m(std::int64_t params) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(params) / 1e6);
    return buf;
}

// --- subcommand bodies ------------------------------------------------------

int run_simulate(const SimulationParams& params, const std::string& format_name,
                 const std::string& out_path, const std::string& pr_out) {
    const auto started = std::chrono::steady_clock::now();
    const EvalReport report = simulate(params);
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    write_output(emit_report(report, parse_format(format_name)), out_path);
    if (!pr_out.empty()) write_output(pr_curve_csv(report), pr_out);
    std::cerr << "simulated " << params.scenes << " scenes in " << elapsed
              << " s (threads=" << params.threads << ")\n";
    return kExitOk;
}

int run_judge(const std::string& mask_path, const std::string& boxes_path,
              const JudgeConfig& cfg, const std::string& out_path) {
    const BinaryMask mask = read_mask_file(mask_path);
    const auto entries = read_box_file(boxes_path);
    std::vector<Detection> dets;
    dets.reserve(entries.size());
    for (const BoxEntry& e : entries) dets.push_back({e.box, e.confidence});
    std::ostringstream out;
    for (const Verdict& v : annotate_frame(dets, mask, cfg)) {
        out << "{\"x0\":" << v.detection.box.x_min
            << ",\"y0\":" << v.detection.box.y_min
            << ",\"x1\":" << v.detection.box.x_max
            << ",\"y1\":" << v.detection.box.y_max << ",\"confidence\":"
            << v.detection.confidence << ",\"overlap\":" << v.overlap_pixels
            << ",\"intrusion\":\"" << (v.intruding ? 'Y' : 'N') << "\"}\n";
    }
    write_output(out.str(), out_path);
    return kExitOk;
}

int run_fuse(const std::string& mask_path, const std::string& boxes_path,
             std::int64_t p_t, const std::string& review_path,
             const std::string& out_path) {
    const BinaryMask mask = read_mask_file(mask_path);
    const auto entries = read_box_file(boxes_path);
    std::vector<BBox> boxes;
    boxes.reserve(entries.size());
    for (const BoxEntry& e : entries) boxes.push_back(e.box);
    const auto cases = fuse_labels(mask, boxes, p_t);
    std::ostringstream out;
    for (const GroundTruthCase& gt : cases) {
        out << "{\"x0\":" << gt.box.x_min << ",\"y0\":" << gt.box.y_min
            << ",\"x1\":" << gt.box.x_max << ",\"y1\":" << gt.box.y_max
            << ",\"intrusion\":\"" << (gt.intrusion ? 'Y' : 'N') << "\"}\n";
    }
    write_output(out.str(), out_path);
    if (!review_path.empty()) {
        std::ostringstream review;
        for (std::size_t idx : review_candidates(mask, boxes, p_t)) {
            const BBox& b = boxes[idx];
            review << "{\"index\":" << idx << ",\"x0\":" << b.x_min
                   << ",\"y0\":" << b.y_min << ",\"x1\":" << b.x_max
                   << ",\"y1\":" << b.y_max
                   << ",\"overlap\":" << bbox_mask_overlap(b, mask)
                   << ",\"p_t\":" << p_t << "}\n";
        }
        write_output(review.str(), review_path);
    }
    return kExitOk;
}

int run_stats(const std::string& dataset_path, bool drop_empty) {
    auto records = read_dataset(dataset_path);
    if (drop_empty) {
        std::erase_if(records,
                      [](const FrameRecord& rec) { return rec.cases.empty(); });
    }
    const DatasetStats stats = dataset_stats(records);
    std::cout << "cities: " << stats.cities << '\n'
              << "images: " << stats.images << '\n'
              << "intrusion_cases: " << stats.intrusion_cases << '\n'
              << "no_intrusion_cases: " << stats.no_intrusion_cases << '\n';
    char avg[32];
    std::snprintf(avg, sizeof avg, "%.2f", stats.avg_cases_per_image);
    std::cout << "avg_cases_per_image: " << avg << '\n';
    return kExitOk;
}

int run_evaluate(const std::string& dataset_path, const std::string& dets_path,
                 const EvalConfig& cfg, const std::string& format_name,
                 const std::string& out_path, const std::string& pr_out) {
    const auto records = read_dataset(dataset_path);
    const auto base_dir = std::filesystem::path(dataset_path).parent_path();
    std::map<std::string, std::vector<BoxEntry>> by_frame;
    for (BoxEntry& e : read_box_file(dets_path)) {
        if (e.frame_id.empty()) {
            throw SemanticError(0, "detection records need a frame_id");
        }
        by_frame[e.frame_id].push_back(std::move(e));
    }
    std::map<std::string, bool> known;
    std::vector<FrameEval> frames;
    frames.reserve(records.size());
    for (const FrameRecord& rec : records) {
        known[rec.frame_id] = true;
        FrameEval frame;
        frame.gts = rec.cases;
        const auto it = by_frame.find(rec.frame_id);
        if (it != by_frame.end()) {
            const BinaryMask mask = load_mask(rec, base_dir);
            for (const BoxEntry& e : it->second) {
                frame.detections.push_back(
                    {e.box, e.confidence, bbox_mask_overlap(e.box, mask)});
            }
        }
        frames.push_back(std::move(frame));
    }
    for (const auto& [frame_id, dets] : by_frame) {
        if (!known.count(frame_id)) {
            throw SemanticError(0, "detections reference unknown frame_id " + frame_id);
        }
    }
    const EvalReport report = evaluate(frames, cfg);
    write_output(emit_report(report, parse_format(format_name)), out_path);
    if (!pr_out.empty()) write_output(pr_curve_csv(report), pr_out);
    return kExitOk;
}

int run_analyze_arch(const std::string& preset_name, const std::string& input_dims,
                     bool csv, bool list, bool ratios) {
    if (ratios) {
        std::cout << "label,numerator_params,denominator_params,ratio,approx\n";
        for (const RatioEntry& entry : compression_ratio_report()) {
            char approx[32];
            std::snprintf(approx, sizeof approx, "1/%.1f", 1.0 / entry.ratio);
            std::cout << entry.label << ',' << entry.numerator_params << ','
                      << entry.denominator_params << ',' << entry.ratio << ','
                      << approx << '\n';
        }
        return kExitOk;
    }
    std::vector<ArchSpec> specs;
    if (list || preset_name.empty()) {
        specs = preset_variants();
    } else {
        specs.push_back(preset(preset_name));
    }
    if (!input_dims.empty()) {
        InputDims dims;
        if (std::sscanf(input_dims.c_str(), "%dx%dx%d", &dims.channels, &dims.height,
                        &dims.width) != 3) {
            throw std::invalid_argument("--input expects CxHxW, e.g. 3x512x1024");
        }
        for (ArchSpec& spec : specs) spec.input = dims;
    }
    std::ostringstream out;
    if (csv) {
        out << "name,params,params_m,reference_m,macs,rf\n";
    } else {
        out << "name                      params        params(M)  ref(M)  macs            rf\n";
    }
    for (const ArchSpec& spec : specs) {
        const std::int64_t params = model_params(spec);
        std::string macs = "-", rf = "-";
        if (!spec.branched()) {
            bool has_fc = false;
            for (const LayerSpec& l : spec.layers) {
                has_fc |= l.kind == LayerKind::FullyConnected;
            }
            macs = std::to_string(model_macs(spec));
            if (!has_fc) rf = std::to_string(receptive_field(spec).rf);
        }
        std::string ref = "-";
        if (spec.reference_params_m) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f", *spec.reference_params_m);
            ref = buf;
        }
        if (csv) {
            out << spec.name << ',' << params << ',' << format_params_m(params) << ','
                << ref << ',' << macs << ',' << rf << '\n';
        } else {
            char row[160];
            std::snprintf(row, sizeof row, "%-25s %-13lld %-10s %-7s %-15s %s\n",
                          spec.name.c_str(), static_cast<long long>(params),
                          format_params_m(params).c_str(), ref.c_str(), macs.c_str(),
                          rf.c_str());
            out << row;
        }
    }
    std::cout << out.str();
    return kExitOk;
}

int run_validate(const std::string& dataset_path) {
    const auto records = read_dataset(dataset_path);
    std::cout << "ok: " << records.size() << " frames\n";
    return kExitOk;
}

int run_anchors(const std::string& grid, int stride,
                const std::vector<double>& scales, const std::vector<double>& ratios,
                const std::string& out_path) {
    AnchorConfig cfg;
    cfg.stride = stride;
    if (!scales.empty()) cfg.scales = scales;
    if (!ratios.empty()) {
        cfg.ratios.clear();
        for (double r : ratios) cfg.ratios.push_back({r, 1.0});
    }
    int gw = 0, gh = 0;
    if (std::sscanf(grid.c_str(), "%dx%d", &gw, &gh) != 2) {
        throw std::invalid_argument("--grid expects WxH, e.g. 64x32");
    }
    const auto anchors = generate_anchors(cfg, gw, gh);
    std::ostringstream out;
    write_anchor_dump(out, anchors);
    write_output(out.str(), out_path);
    std::cerr << anchors.size() << " anchors\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pedestrian-intrusion-detection toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run the synthetic pipeline");
    SimulationParams sim;
    std::string sim_mode = "fcm", sim_format = "text", sim_out, sim_pr_out, sim_config;
    std::string empty_aoi = "skip";
    sim_cmd->add_option("--scenes", sim.scenes, "number of frames");
    sim_cmd->add_option("--seed", sim.seed, "root seed");
    sim_cmd->add_option("--mode", sim_mode, "fcm|full");
    sim_cmd->add_option("--alpha", sim.pipeline.crop.alpha, "crop extension coefficient");
    sim_cmd->add_flag("--symmetric", sim.pipeline.crop.symmetric,
                      "extend min coordinates too");
    sim_cmd->add_option("--empty-aoi", empty_aoi, "skip|full policy for empty AoI");
    sim_cmd->add_option("--stride", sim.pipeline.stride, "feature stride");
    sim_cmd->add_option("--pt", sim.pipeline.judge.p_t, "overlap threshold");
    sim_cmd->add_option("--ct", sim.pipeline.judge.c_t, "confidence threshold");
    sim_cmd->add_option("--iou", sim.pipeline.eval.iou_threshold, "match iou threshold");
    sim_cmd->add_option("--nms-iou", sim.pipeline.nms.iou_threshold, "nms threshold");
    sim_cmd->add_option("--jitter", sim.noise.jitter_px, "max per-edge jitter");
    sim_cmd->add_option("--drop", sim.noise.drop_prob, "per-pedestrian miss probability");
    sim_cmd->add_option("--spurious", sim.noise.spurious_rate, "false boxes per frame");
    sim_cmd->add_option("--conf-true", sim.noise.conf_model.mean_true,
                        "mean confidence of true detections");
    sim_cmd->add_option("--conf-false", sim.noise.conf_model.mean_false,
                        "mean confidence of spurious detections");
    sim_cmd->add_option("--spread", sim.noise.conf_model.spread, "confidence stddev");
    sim_cmd->add_option("--scene-width", sim.scene.width, "frame width");
    sim_cmd->add_option("--scene-height", sim.scene.height, "frame height");
    sim_cmd->add_option("--pedestrians", sim.scene.pedestrian_count,
                        "pedestrians per frame");
    sim_cmd->add_option("--threads", sim.threads, "worker threads");
    sim_cmd->add_option("--format", sim_format, "text|csv|records");
    sim_cmd->add_option("--out", sim_out, "report file (default stdout)");
    sim_cmd->add_option("--pr-out", sim_pr_out, "PR-curve csv file");
    sim_cmd->add_option("--config", sim_config, "json config file");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score detections against a dataset");
    std::string eval_dataset, eval_dets, eval_format = "text", eval_out, eval_pr_out;
    std::string eval_acc = "corrected";
    EvalConfig eval_cfg;
    std::vector<std::int64_t> eval_pt_set;
    eval_cmd->add_option("--dataset", eval_dataset, "dataset file")->required();
    eval_cmd->add_option("--detections", eval_dets, "detections file")->required();
    eval_cmd->add_option("--pt", eval_cfg.p_t, "overlap threshold");
    eval_cmd->add_option("--ct", eval_cfg.c_t, "confidence threshold");
    eval_cmd->add_option("--iou", eval_cfg.iou_threshold, "match iou threshold");
    eval_cmd->add_option("--pt-set", eval_pt_set, "overlap thresholds for PID_mAP");
    eval_cmd->add_option("--acc", eval_acc, "corrected|literal accuracy formula");
    eval_cmd->add_option("--format", eval_format, "text|csv|records");
    eval_cmd->add_option("--out", eval_out, "report file (default stdout)");
    eval_cmd->add_option("--pr-out", eval_pr_out, "PR-curve csv file");

    // judge
    auto* judge_cmd = app.add_subcommand("judge", "judge boxes against an AoI mask");
    std::string judge_mask, judge_boxes, judge_out;
    JudgeConfig judge_cfg;
    judge_cmd->add_option("--mask", judge_mask, "mask file (pgm or rle)")->required();
    judge_cmd->add_option("--boxes", judge_boxes, "box file (json lines)")->required();
    judge_cmd->add_option("--pt", judge_cfg.p_t, "overlap threshold");
    judge_cmd->add_option("--ct", judge_cfg.c_t, "confidence threshold");
    judge_cmd->add_option("--out", judge_out, "verdict file (default stdout)");

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "label boxes from a mask");
    std::string fuse_mask, fuse_boxes, fuse_review, fuse_out;
    std::int64_t fuse_pt = 20;
    fuse_cmd->add_option("--mask", fuse_mask, "mask file (pgm or rle)")->required();
    fuse_cmd->add_option("--boxes", fuse_boxes, "box file (json lines)")->required();
    fuse_cmd->add_option("--pt", fuse_pt, "overlap threshold");
    fuse_cmd->add_option("--review", fuse_review, "write near-threshold review file");
    fuse_cmd->add_option("--out", fuse_out, "case file (default stdout)");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
    std::string stats_dataset;
    bool stats_drop_empty = false;
    stats_cmd->add_option("--dataset", stats_dataset, "dataset file")->required();
    stats_cmd->add_flag("--drop-empty-frames", stats_drop_empty,
                        "ignore frames without cases");

    // analyze-arch
    auto* arch_cmd = app.add_subcommand("analyze-arch", "parameter/MAC/rf accounting");
    std::string arch_preset, arch_input;
    bool arch_csv = false, arch_list = false, arch_ratios = false;
    arch_cmd->add_option("--preset", arch_preset, "preset name");
    arch_cmd->add_option("--input", arch_input, "input dims CxHxW");
    arch_cmd->add_flag("--csv", arch_csv, "csv output");
    arch_cmd->add_flag("--list", arch_list, "list every preset");
    arch_cmd->add_flag("--ratios", arch_ratios, "spatial-path compression ratios");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "validate a dataset file");
    std::string val_dataset;
    val_cmd->add_option("--dataset", val_dataset, "dataset file")->required();

    // anchors
    auto* anchor_cmd = app.add_subcommand("anchors", "dump anchor boxes");
    std::string anchor_grid = "4x4", anchor_out;
    int anchor_stride = 16;
    std::vector<double> anchor_scales, anchor_ratios;
    anchor_cmd->add_option("--grid", anchor_grid, "feature grid WxH");
    anchor_cmd->add_option("--stride", anchor_stride, "feature stride");
    anchor_cmd->add_option("--scales", anchor_scales, "anchor areas");
    anchor_cmd->add_option("--ratios", anchor_ratios, "w:h ratios as w/h values");
    anchor_cmd->add_option("--out", anchor_out, "dump file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            const json cfg = load_config(sim_config);
            config_override(*sim_cmd, "--scenes", cfg, "scenes", sim.scenes);
            config_override(*sim_cmd, "--seed", cfg, "seed", sim.seed);
            config_override(*sim_cmd, "--mode", cfg, "mode", sim_mode);
            config_override(*sim_cmd, "--alpha", cfg, "alpha", sim.pipeline.crop.alpha);
            config_override(*sim_cmd, "--stride", cfg, "stride", sim.pipeline.stride);
            config_override(*sim_cmd, "--pt", cfg, "pt", sim.pipeline.judge.p_t);
            config_override(*sim_cmd, "--ct", cfg, "ct", sim.pipeline.judge.c_t);
            config_override(*sim_cmd, "--jitter", cfg, "jitter", sim.noise.jitter_px);
            config_override(*sim_cmd, "--drop", cfg, "drop", sim.noise.drop_prob);
            config_override(*sim_cmd, "--spurious", cfg, "spurious",
                            sim.noise.spurious_rate);
            config_override(*sim_cmd, "--threads", cfg, "threads", sim.threads);
            config_override(*sim_cmd, "--format", cfg, "format", sim_format);
            if (sim_mode == "fcm") {
                sim.pipeline.mode = PipelineMode::Fcm;
            } else if (sim_mode == "full") {
                sim.pipeline.mode = PipelineMode::FullFrame;
            } else {
                throw std::invalid_argument("--mode expects fcm or full");
            }
            if (empty_aoi == "skip") {
                sim.pipeline.crop.empty_aoi_policy = EmptyAoiPolicy::SkipDetection;
            } else if (empty_aoi == "full") {
                sim.pipeline.crop.empty_aoi_policy = EmptyAoiPolicy::FullFrame;
            } else {
                throw std::invalid_argument("--empty-aoi expects skip or full");
            }
            sim.pipeline.eval.p_t = sim.pipeline.judge.p_t;
            sim.pipeline.eval.p_t_set = {sim.pipeline.judge.p_t};
            sim.pipeline.eval.c_t = sim.pipeline.judge.c_t;
            sim.scene.label_p_t = sim.pipeline.judge.p_t;
            return run_simulate(sim, sim_format, sim_out, sim_pr_out);
        }
        if (eval_cmd->parsed()) {
            if (!eval_pt_set.empty()) eval_cfg.p_t_set = eval_pt_set;
            if (eval_acc == "corrected") {
                eval_cfg.acc_formula = AccFormula::Corrected;
            } else if (eval_acc == "literal") {
                eval_cfg.acc_formula = AccFormula::Literal;
            } else {
                throw std::invalid_argument("--acc expects corrected or literal");
            }
            return run_evaluate(eval_dataset, eval_dets, eval_cfg, eval_format,
                                eval_out, eval_pr_out);
        }
        if (judge_cmd->parsed()) {
            return run_judge(judge_mask, judge_boxes, judge_cfg, judge_out);
        }
        if (fuse_cmd->parsed()) {
            return run_fuse(fuse_mask, fuse_boxes, fuse_pt, fuse_review, fuse_out);
        }
        if (stats_cmd->parsed()) {
            return run_stats(stats_dataset, stats_drop_empty);
        }
        if (arch_cmd->parsed()) {
            return run_analyze_arch(arch_preset, arch_input, arch_csv, arch_list,
                                    arch_ratios);
        }
        if (val_cmd->parsed()) {
            return run_validate(val_dataset);
        }
        if (anchor_cmd->parsed()) {
            return run_anchors(anchor_grid, anchor_stride, anchor_scales,
                               anchor_ratios, anchor_out);
        }
    } catch (const MalformedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMalformed;
    } catch (const MaskFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMalformed;
    } catch (const SemanticError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSemantic;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSemantic;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
