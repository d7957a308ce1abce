#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pidkit/detection.hpp"
#include "pidkit/geometry.hpp"
#include "pidkit/intrusion.hpp"
#include "pidkit/metrics.hpp"

namespace pidkit {

/**
 * @brief Synthetic frame: a rasterized road polygon as the AoI plus
 * pedestrian boxes labeled by fuse_labels.
 *
 * The generator keeps every pedestrian center inside the road MBR and
 * pedestrian pairs below 0.5 IoU, so a noiseless detector sees every case
 * in both pipeline modes and one-to-one matching is unambiguous.
 */
struct Scene {
    int width = 0, height = 0;
    std::vector<Vec2> road_polygon;
    BinaryMask mask;
    std::vector<BBox> pedestrians;
    std::vector<GroundTruthCase> gt_cases;
};

struct SceneParams {
    int width = 1024, height = 512;
    int pedestrian_count = 8;
    int min_ped_w = 16, max_ped_w = 60;
    int min_ped_h = 40, max_ped_h = 120;
    std::int64_t label_p_t = 20;
    double max_pair_iou = 0.5;
};

struct ConfModel {
    double mean_true = 0.95;
    double mean_false = 0.55;
    double spread = 0.0;
};

/// Stand-in for the learned detector: per-pedestrian drop and edge jitter,
/// Poisson-many spurious boxes, confidences from conf_model. The seed fully
/// determines the output.
struct DetectorNoise {
    int jitter_px = 0;
    double drop_prob = 0.0;
    double spurious_rate = 0.0;
    ConfModel conf_model;
    std::uint64_t seed = 0;
};

enum class PipelineMode { FullFrame, Fcm };

struct PipelineConfig {
    CropConfig crop;
    int stride = 16;
    JudgeConfig judge;
    NmsConfig nms;
    EvalConfig eval;
    PipelineMode mode = PipelineMode::Fcm;
};

/// Builds a scene from explicit parts: validates the polygon (>= 3 vertices,
/// nonzero raster) and pedestrian bounds, rasterizes, fuses labels.
Scene make_scene(int width, int height, std::vector<Vec2> road_polygon,
                 std::vector<BBox> pedestrians, std::int64_t label_p_t);

/// Deterministic in (params, seed).
Scene generate_scene(const SceneParams& params, std::uint64_t seed);

/// Detections for pedestrians whose box center lies inside visible (boxes
/// may overhang it), plus spurious boxes drawn inside visible.
std::vector<Detection> oracle_detect(const Scene& scene, const DetectorNoise& noise,
                                     const Rect& visible);

struct FrameOutcome {
    std::vector<Verdict> verdicts;  ///< confidence-gated, judged detections
    FrameEval eval;                 ///< ungated post-NMS detections + gts
    Rect visible;                   ///< region the detector saw
};

/// One frame through the pipeline: (in fcm mode) mask -> MBR -> extend ->
/// feature-grid crop -> pixel crop as the detector's visible region, then
/// detect, NMS, judge. Empty-AoI frames follow crop.empty_aoi_policy.
FrameOutcome process_frame(const Scene& scene, const PipelineConfig& cfg,
                           const DetectorNoise& noise);

/// process_frame plus a single-frame evaluation.
std::pair<std::vector<Verdict>, EvalReport> run_pipeline(const Scene& scene,
                                                         const PipelineConfig& cfg,
                                                         const DetectorNoise& noise);

struct SimulationParams {
    int scenes = 100;
    std::uint64_t seed = 1;
    SceneParams scene;
    PipelineConfig pipeline;
    DetectorNoise noise;  ///< noise.seed is re-derived per frame from `seed`
    int threads = 1;
};

/// Generates `scenes` frames, runs the pipeline on each (frames are
/// independent; per-frame streams are split from the root seed, so serial
/// and threaded runs agree), and evaluates the aggregate.
EvalReport simulate(const SimulationParams& params);

}  // namespace pidkit
