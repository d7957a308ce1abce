#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pidkit {

enum class LayerKind {
    Conv,
    DepthwiseConv,
    PointwiseConv,
    FullyConnected,
    BatchNorm,
    Pooling,
};

std::string to_string(LayerKind kind);

/**
 * @brief Symbolic layer for parameter / MAC / receptive-field accounting.
 *
 * Depthwise layers require in_ch == out_ch (multiplier 1). Pooling with
 * kernel == 0 and stride == 0 means global pooling (collapses to 1x1).
 * Fully-connected layers flatten; their in_ch must equal C*H*W at that
 * point in the chain.
 */
struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int in_ch = 1;
    int out_ch = 1;
    int kernel = 1;
    int stride = 1;
    bool has_bias = false;
};

struct InputDims {
    int channels = 3;
    int height = 512;
    int width = 1024;
};

/**
 * @brief Named architecture: a sequential main path plus an optional bag of
 * parallel-branch layers (projection shortcuts, a parallel context path).
 *
 * side_layers count toward parameters but make the spec "branched":
 * receptive_field and model_macs reject it, since those are path
 * properties. Analyze each path as its own ArchSpec instead.
 */
struct ArchSpec {
    std::string name;
    InputDims input;
    std::vector<LayerSpec> layers;
    std::vector<LayerSpec> side_layers;
    std::optional<double> reference_params_m;  ///< published total, when known

    bool branched() const { return !side_layers.empty(); }
};

/// Learnable parameter count. conv: k^2*in*out (+out); depthwise: k^2*in
/// (+in); pointwise: in*out (+out); fully-connected: in*out (+out);
/// batch-norm: 2*out (scale/shift; running stats excluded); pooling: 0.
/// Throws std::invalid_argument on inconsistent channels or bad kernel.
std::int64_t layer_params(const LayerSpec& layer);

/// Sum over main and side layers; validates channel chaining (and fc
/// flattening) along the main path against spec.input.
std::int64_t model_params(const ArchSpec& spec);

struct ReceptiveField {
    std::int64_t rf = 1;
    std::int64_t jump = 1;
};

/// Standard recursion rf' = rf + (k-1)*jump, jump' = jump*stride over the
/// main path; pooling counts like a conv. Rejects branched specs and specs
/// containing fully-connected layers.
ReceptiveField receptive_field(const ArchSpec& spec);

/// Multiply-accumulate count for one layer on an in_h x in_w map with
/// same-padding output ceil(in/stride). conv: k^2*in*out*out_h*out_w;
/// depthwise: k^2*in*out_h*out_w; fully-connected: in*out; batch-norm and
/// pooling: 0.
std::int64_t layer_flops(const LayerSpec& layer, int in_h, int in_w);

/// Total MACs along the main path at the spec's input size. Rejects
/// branched specs.
std::int64_t model_macs(const ArchSpec& spec);

/// All shipped presets: spatial-path variants, context paths, combined
/// backbones, RPN and R-CNN-head pairs, resnet classifiers.
std::vector<ArchSpec> preset_variants();

/// Lookup by name; throws std::invalid_argument for unknown names.
ArchSpec preset(const std::string& name);

/// Configurable spatial path: three stride-2 blocks (conv+BN, or depthwise
/// +pointwise+BN when separable), widths channels per layer.
ArchSpec spatial_path_spec(int kernel, bool separable, int channels);

struct RatioEntry {
    std::string label;
    std::int64_t numerator_params = 0;
    std::int64_t denominator_params = 0;
    double ratio = 0.0;
};

/// Candidate spatial-path compression ratios (separable and depthwise-only
/// layers vs 3x3 and 5x5 baselines, per-layer and whole-path). Reported,
/// never asserted: the counting convention behind the published figure is
/// not recoverable.
std::vector<RatioEntry> compression_ratio_report();

}  // namespace pidkit
