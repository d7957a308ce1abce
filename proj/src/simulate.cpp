#include "pidkit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "pidkit/dataset.hpp"
#include "pidkit/random.hpp"

namespace pidkit {

Scene make_scene(int width, int height, std::vector<Vec2> road_polygon,
                 std::vector<BBox> pedestrians, std::int64_t label_p_t) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("scene dimensions must be positive");
    }
    if (road_polygon.size() < 3) {
        throw std::invalid_argument("degenerate road polygon: need >= 3 vertices");
    }
    double shoelace = 0.0;
    for (std::size_t i = 0; i < road_polygon.size(); ++i) {
        const Vec2& a = road_polygon[i];
        const Vec2& b = road_polygon[(i + 1) % road_polygon.size()];
        shoelace += a.x * b.y - b.x * a.y;
    }
    if (shoelace == 0.0) {
        throw std::invalid_argument("degenerate road polygon: zero area");
    }
    for (const BBox& p : pedestrians) {
        if (!p.valid() || p.x_max > width || p.y_max > height) {
            throw std::invalid_argument("pedestrian box out of scene bounds");
        }
    }
    Scene scene;
    scene.width = width;
    scene.height = height;
    scene.road_polygon = std::move(road_polygon);
    // an off-frame polygon rasterizes empty: a legal empty-AoI scene
    scene.mask = rasterize_polygon(scene.road_polygon, width, height);
    scene.pedestrians = std::move(pedestrians);
    scene.gt_cases = fuse_labels(scene.mask, scene.pedestrians, label_p_t);
    return scene;
}

Scene generate_scene(const SceneParams& params, std::uint64_t seed) {
    if (params.width < 64 || params.height < 64) {
        throw std::invalid_argument("scene must be at least 64x64");
    }
    if (params.pedestrian_count < 0) {
        throw std::invalid_argument("pedestrian_count must be >= 0");
    }
    Rng rng(seed);
    const double w = params.width, h = params.height;

    // Trapezoid road: full-width bottom edge, narrower top edge. The MBR is
    // [0,w] x [y_top,h], so pedestrian centers sampled below y_top always
    // fall inside it.
    const double y_top = rng.uniform_real(0.35 * h, 0.55 * h);
    const double x_tl = rng.uniform_real(0.20 * w, 0.40 * w);
    const double x_tr = rng.uniform_real(0.60 * w, 0.80 * w);
    std::vector<Vec2> road{{0.0, h}, {x_tl, y_top}, {x_tr, y_top}, {w, h}};

    std::vector<BBox> peds;
    int attempts = 0;
    while (static_cast<int>(peds.size()) < params.pedestrian_count &&
           attempts < params.pedestrian_count * 200) {
        ++attempts;
        const int pw = static_cast<int>(rng.uniform_int(params.min_ped_w, params.max_ped_w));
        const int ph = static_cast<int>(rng.uniform_int(params.min_ped_h, params.max_ped_h));
        const int cx = static_cast<int>(rng.uniform_int(0, params.width - 1));
        const int cy = static_cast<int>(
            rng.uniform_int(static_cast<std::int64_t>(y_top) + 1, params.height - 1));
        BBox box;
        box.x_min = std::clamp(cx - pw / 2, 0, params.width - 1);
        box.y_min = std::clamp(cy - ph / 2, 0, params.height - 1);
        box.x_max = std::min(box.x_min + pw, params.width);
        box.y_max = std::min(box.y_min + ph, params.height);
        if (!box.valid()) continue;
        bool crowded = false;
        for (const BBox& other : peds) {
            if (bbox_iou(box, other) > params.max_pair_iou) {
                crowded = true;
                break;
            }
        }
        if (!crowded) peds.push_back(box);
    }
    return make_scene(params.width, params.height, std::move(road), std::move(peds),
                      params.label_p_t);
}

namespace {

bool center_inside(const BBox& box, const Rect& region) {
    const double cx = (box.x_min + box.x_max) / 2.0;
    const double cy = (box.y_min + box.y_max) / 2.0;
    return cx >= region.x_min && cx < region.x_max && cy >= region.y_min &&
           cy < region.y_max;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Clamps to the frame and repairs degenerate extents.
BBox sanitize(BBox box, int width, int height) {
    box.x_min = std::clamp(box.x_min, 0, width - 1);
    box.y_min = std::clamp(box.y_min, 0, height - 1);
    box.x_max = std::clamp(box.x_max, box.x_min + 1, width);
    box.y_max = std::clamp(box.y_max, box.y_min + 1, height);
    return box;
}

}  // namespace

std::vector<Detection> oracle_detect(const Scene& scene, const DetectorNoise& noise,
                                     const Rect& visible) {
    if (!visible.valid() || visible.x_max > scene.width || visible.y_max > scene.height) {
        throw std::invalid_argument("visible region out of frame");
    }
    Rng rng(noise.seed);
    std::vector<Detection> dets;
    for (const BBox& ped : scene.pedestrians) {
        const bool dropped = rng.uniform01() < noise.drop_prob;
        if (dropped) continue;
        if (!center_inside(ped, visible)) continue;
        BBox box = ped;
        if (noise.jitter_px > 0) {
            box.x_min += static_cast<int>(rng.uniform_int(-noise.jitter_px, noise.jitter_px));
            box.y_min += static_cast<int>(rng.uniform_int(-noise.jitter_px, noise.jitter_px));
            box.x_max += static_cast<int>(rng.uniform_int(-noise.jitter_px, noise.jitter_px));
            box.y_max += static_cast<int>(rng.uniform_int(-noise.jitter_px, noise.jitter_px));
            box = sanitize(box, scene.width, scene.height);
        }
        const double conf =
            noise.conf_model.spread > 0.0
                ? clamp01(rng.normal(noise.conf_model.mean_true, noise.conf_model.spread))
                : noise.conf_model.mean_true;
        dets.push_back({box, conf});
    }
    const std::int64_t spurious = rng.poisson(noise.spurious_rate);
    for (std::int64_t s = 0; s < spurious; ++s) {
        const int max_w = std::min(60, visible.width());
        const int max_h = std::min(120, visible.height());
        const int bw = static_cast<int>(rng.uniform_int(std::min(10, max_w), max_w));
        const int bh = static_cast<int>(rng.uniform_int(std::min(20, max_h), max_h));
        BBox box;
        box.x_min = static_cast<int>(rng.uniform_int(visible.x_min, visible.x_max - 1));
        box.y_min = static_cast<int>(rng.uniform_int(visible.y_min, visible.y_max - 1));
        box.x_max = std::max(box.x_min + 1, std::min(box.x_min + bw, visible.x_max));
        box.y_max = std::max(box.y_min + 1, std::min(box.y_min + bh, visible.y_max));
        const double conf =
            noise.conf_model.spread > 0.0
                ? clamp01(rng.normal(noise.conf_model.mean_false, noise.conf_model.spread))
                : noise.conf_model.mean_false;
        dets.push_back({box, conf});
    }
    return dets;
}

FrameOutcome process_frame(const Scene& scene, const PipelineConfig& cfg,
                           const DetectorNoise& noise) {
    FrameOutcome outcome;
    outcome.visible = Rect{0, 0, scene.width, scene.height};
    bool skip_detection = false;

    if (cfg.mode == PipelineMode::Fcm) {
        const auto mbr = mbr_of_mask(scene.mask);
        if (!mbr) {
            if (cfg.crop.empty_aoi_policy == EmptyAoiPolicy::SkipDetection) {
                skip_detection = true;
            }
            // FullFrame policy keeps the whole-frame visible region.
        } else {
            const Rect extended = extend_rect(*mbr, cfg.crop, scene.width, scene.height);
            FeatureRect fr = map_rect_to_feature(extended, cfg.stride);
            fr = clamp_to_grid(fr, scene.width, scene.height);
            outcome.visible = feature_rect_to_pixels(fr, scene.width, scene.height);
        }
    }

    std::vector<Detection> dets;
    if (!skip_detection) {
        dets = oracle_detect(scene, noise, outcome.visible);
        dets = nms(std::move(dets), cfg.nms);
    }
    outcome.verdicts = annotate_frame(dets, scene.mask, cfg.judge);
    outcome.eval.gts = scene.gt_cases;
    outcome.eval.detections.reserve(dets.size());
    for (const Detection& d : dets) {
        outcome.eval.detections.push_back(
            {d.box, d.confidence, bbox_mask_overlap(d.box, scene.mask)});
    }
    return outcome;
}

std::pair<std::vector<Verdict>, EvalReport> run_pipeline(const Scene& scene,
                                                         const PipelineConfig& cfg,
                                                         const DetectorNoise& noise) {
    FrameOutcome outcome = process_frame(scene, cfg, noise);
    const std::vector<FrameEval> frames{outcome.eval};
    return {std::move(outcome.verdicts), evaluate(frames, cfg.eval)};
}

EvalReport simulate(const SimulationParams& params) {
    if (params.scenes <= 0) throw std::invalid_argument("need at least one scene");
    const int threads = std::max(1, params.threads);

    std::vector<FrameEval> frames(static_cast<std::size_t>(params.scenes));
    const Rng root(params.seed);
    auto worker = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const auto idx = static_cast<std::uint64_t>(i);
            const Scene scene =
                generate_scene(params.scene, root.split(2 * idx).seed());
            DetectorNoise noise = params.noise;
            noise.seed = root.split(2 * idx + 1).seed();
            frames[static_cast<std::size_t>(i)] =
                process_frame(scene, params.pipeline, noise).eval;
        }
    };

    if (threads == 1) {
        worker(0, params.scenes);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        const int chunk = (params.scenes + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(params.scenes, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, t, begin, end] {
                try {
                    worker(begin, end);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }
    return evaluate(frames, params.pipeline.eval);
}

}  // namespace pidkit
