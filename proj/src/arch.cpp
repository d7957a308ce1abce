#include "pidkit/arch.hpp"

#include <algorithm>
#include <stdexcept>

namespace pidkit {

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Conv: return "conv";
        case LayerKind::DepthwiseConv: return "depthwise-conv";
        case LayerKind::PointwiseConv: return "pointwise-conv";
        case LayerKind::FullyConnected: return "fully-connected";
        case LayerKind::BatchNorm: return "batch-norm";
        case LayerKind::Pooling: return "pooling";
    }
    return "unknown";
}

namespace {

void check_layer(const LayerSpec& l) {
    if (l.in_ch <= 0 || l.out_ch <= 0) {
        throw std::invalid_argument("layer channels must be positive");
    }
    const bool global_pool = l.kind == LayerKind::Pooling && l.kernel == 0 && l.stride == 0;
    if (!global_pool && (l.kernel < 1 || l.stride < 1)) {
        throw std::invalid_argument("layer kernel and stride must be >= 1");
    }
    if (l.kind == LayerKind::DepthwiseConv && l.in_ch != l.out_ch) {
        throw std::invalid_argument("depthwise layers require in_ch == out_ch");
    }
    if ((l.kind == LayerKind::BatchNorm || l.kind == LayerKind::Pooling) &&
        l.in_ch != l.out_ch) {
        throw std::invalid_argument(to_string(l.kind) + " preserves channel count");
    }
}

int out_extent(int in, int stride) { return (in + stride - 1) / stride; }

}  // namespace

std::int64_t layer_params(const LayerSpec& l) {
    check_layer(l);
    const auto k2 = static_cast<std::int64_t>(l.kernel) * l.kernel;
    const std::int64_t in = l.in_ch, out = l.out_ch;
    switch (l.kind) {
        case LayerKind::Conv:
            return k2 * in * out + (l.has_bias ? out : 0);
        case LayerKind::DepthwiseConv:
            return k2 * in + (l.has_bias ? in : 0);
        case LayerKind::PointwiseConv:
            return in * out + (l.has_bias ? out : 0);
        case LayerKind::FullyConnected:
            return in * out + (l.has_bias ? out : 0);
        case LayerKind::BatchNorm:
            return 2 * out;
        case LayerKind::Pooling:
            return 0;
    }
    throw std::invalid_argument("unknown layer kind");
}

namespace {

struct Tracked {
    int channels, height, width;
};

// Walks the main path validating channel chaining (and fc flattening),
// returning the dims after each layer.
Tracked advance(const Tracked& t, const LayerSpec& l) {
    check_layer(l);
    Tracked next = t;
    switch (l.kind) {
        case LayerKind::Conv:
        case LayerKind::DepthwiseConv:
        case LayerKind::PointwiseConv:
        case LayerKind::BatchNorm:
        case LayerKind::Pooling: {
            if (l.in_ch != t.channels) {
                throw std::invalid_argument(
                    "channel chaining broken: " + to_string(l.kind) + " expects " +
                    std::to_string(l.in_ch) + " channels, got " +
                    std::to_string(t.channels));
            }
            if (l.kind == LayerKind::Pooling && l.kernel == 0 && l.stride == 0) {
                next.height = 1;
                next.width = 1;
            } else if (l.stride > 1) {
                next.height = out_extent(t.height, l.stride);
                next.width = out_extent(t.width, l.stride);
            }
            next.channels = l.out_ch;
            return next;
        }
        case LayerKind::FullyConnected: {
            const std::int64_t flat =
                static_cast<std::int64_t>(t.channels) * t.height * t.width;
            if (l.in_ch != flat) {
                throw std::invalid_argument(
                    "fully-connected expects in_ch == C*H*W = " + std::to_string(flat) +
                    ", got " + std::to_string(l.in_ch));
            }
            next.channels = l.out_ch;
            next.height = 1;
            next.width = 1;
            return next;
        }
    }
    throw std::invalid_argument("unknown layer kind");
}

}  // namespace

std::int64_t model_params(const ArchSpec& spec) {
    Tracked t{spec.input.channels, spec.input.height, spec.input.width};
    std::int64_t total = 0;
    for (const LayerSpec& l : spec.layers) {
        total += layer_params(l);
        t = advance(t, l);
    }
    for (const LayerSpec& l : spec.side_layers) total += layer_params(l);
    return total;
}

ReceptiveField receptive_field(const ArchSpec& spec) {
    if (spec.branched()) {
        throw std::invalid_argument(
            "receptive_field: spec '" + spec.name +
            "' is branched; analyze each path separately");
    }
    ReceptiveField rf;
    for (const LayerSpec& l : spec.layers) {
        check_layer(l);
        switch (l.kind) {
            case LayerKind::Conv:
            case LayerKind::DepthwiseConv:
            case LayerKind::PointwiseConv:
            case LayerKind::Pooling:
                if (l.kind == LayerKind::Pooling && l.kernel == 0 && l.stride == 0) {
                    throw std::invalid_argument(
                        "receptive_field: global pooling has no finite extent");
                }
                rf.rf += static_cast<std::int64_t>(l.kernel - 1) * rf.jump;
                rf.jump *= l.stride;
                break;
            case LayerKind::BatchNorm:
                break;
            case LayerKind::FullyConnected:
                throw std::invalid_argument(
                    "receptive_field: undefined over fully-connected layers");
        }
    }
    return rf;
}

std::int64_t layer_flops(const LayerSpec& l, int in_h, int in_w) {
    check_layer(l);
    if (in_h <= 0 || in_w <= 0) {
        throw std::invalid_argument("layer_flops: input extent must be positive");
    }
    const auto k2 = static_cast<std::int64_t>(l.kernel) * l.kernel;
    const std::int64_t out_hw =
        static_cast<std::int64_t>(out_extent(in_h, std::max(l.stride, 1))) *
        out_extent(in_w, std::max(l.stride, 1));
    switch (l.kind) {
        case LayerKind::Conv:
            return k2 * l.in_ch * l.out_ch * out_hw;
        case LayerKind::DepthwiseConv:
            return k2 * l.in_ch * out_hw;
        case LayerKind::PointwiseConv:
            return static_cast<std::int64_t>(l.in_ch) * l.out_ch * out_hw;
        case LayerKind::FullyConnected:
            return static_cast<std::int64_t>(l.in_ch) * l.out_ch;
        case LayerKind::BatchNorm:
        case LayerKind::Pooling:
            return 0;
    }
    throw std::invalid_argument("unknown layer kind");
}

std::int64_t model_macs(const ArchSpec& spec) {
    if (spec.branched()) {
        throw std::invalid_argument("model_macs: spec '" + spec.name +
                                    "' is branched; analyze each path separately");
    }
    Tracked t{spec.input.channels, spec.input.height, spec.input.width};
    std::int64_t total = 0;
    for (const LayerSpec& l : spec.layers) {
        total += layer_flops(l, t.height, t.width);
        t = advance(t, l);
    }
    return total;
}

// --- presets ---------------------------------------------------------------

namespace {

LayerSpec conv(int in, int out, int k, int s = 1, bool bias = false) {
    return {LayerKind::Conv, in, out, k, s, bias};
}
LayerSpec dw(int ch, int k, int s = 1) {
    return {LayerKind::DepthwiseConv, ch, ch, k, s, false};
}
LayerSpec pw(int in, int out) {
    return {LayerKind::PointwiseConv, in, out, 1, 1, false};
}
LayerSpec bn(int ch) { return {LayerKind::BatchNorm, ch, ch, 1, 1, false}; }
LayerSpec fc(int in, int out) {
    return {LayerKind::FullyConnected, in, out, 1, 1, true};
}
LayerSpec maxpool(int ch, int k, int s) {
    return {LayerKind::Pooling, ch, ch, k, s, false};
}
LayerSpec global_pool(int ch) { return {LayerKind::Pooling, ch, ch, 0, 0, false}; }

void append(std::vector<LayerSpec>& dst, std::vector<LayerSpec> src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

// Two-conv residual block; the optional projection shortcut goes to side.
void basic_block(std::vector<LayerSpec>& main, std::vector<LayerSpec>& side,
                 int in, int out, int stride) {
    main.push_back(conv(in, out, 3, stride));
    main.push_back(bn(out));
    main.push_back(conv(out, out, 3, 1));
    main.push_back(bn(out));
    if (stride != 1 || in != out) {
        side.push_back(conv(in, out, 1, stride));
        side.push_back(bn(out));
    }
}

// 1x1 -> 3x3 -> 1x1 residual block with expansion 4.
void bottleneck_block(std::vector<LayerSpec>& main, std::vector<LayerSpec>& side,
                      int in, int mid, int stride) {
    const int out = mid * 4;
    main.push_back(conv(in, mid, 1, 1));
    main.push_back(bn(mid));
    main.push_back(conv(mid, mid, 3, stride));
    main.push_back(bn(mid));
    main.push_back(conv(mid, out, 1, 1));
    main.push_back(bn(out));
    if (stride != 1 || in != out) {
        side.push_back(conv(in, out, 1, stride));
        side.push_back(bn(out));
    }
}

ArchSpec resnet_backbone(const std::string& name, bool bottleneck,
                         const std::vector<int>& block_counts) {
    ArchSpec spec;
    spec.name = name;
    spec.input = {3, 512, 1024};
    spec.layers.push_back(conv(3, 64, 7, 2));
    spec.layers.push_back(bn(64));
    spec.layers.push_back(maxpool(64, 3, 2));
    int in = 64;
    int width = 64;
    for (std::size_t stage = 0; stage < block_counts.size(); ++stage) {
        const int stride = stage == 0 ? 1 : 2;
        for (int b = 0; b < block_counts[stage]; ++b) {
            if (bottleneck) {
                bottleneck_block(spec.layers, spec.side_layers, in,
                                 width, b == 0 ? stride : 1);
                in = width * 4;
            } else {
                basic_block(spec.layers, spec.side_layers, in, width,
                            b == 0 ? stride : 1);
                in = width;
            }
        }
        width *= 2;
    }
    return spec;
}

ArchSpec resnet_classifier(const std::string& name, bool bottleneck,
                           const std::vector<int>& block_counts, int num_classes) {
    ArchSpec spec = resnet_backbone(name, bottleneck, block_counts);
    const int features = bottleneck ? 2048 : 512;
    spec.layers.push_back(global_pool(features));
    spec.layers.push_back(fc(features, num_classes));
    return spec;
}

ArchSpec rpn_spec(const std::string& name, bool compressed, int channels) {
    ArchSpec spec;
    spec.name = name;
    spec.input = {channels, 32, 64};  // stride-16 map of a 512x1024 frame
    if (compressed) {
        spec.layers.push_back(dw(channels, 5));
        spec.layers.push_back(pw(channels, channels));
    } else {
        spec.layers.push_back(conv(channels, channels, 3, 1, true));
    }
    return spec;
}

ArchSpec rcnn_head_spec(const std::string& name, bool compact, int channels) {
    ArchSpec spec;
    spec.name = name;
    spec.input = {channels, 7, 7};  // RoI-pooled features
    const int flat = channels * 7 * 7;
    if (compact) {
        // single 2048-wide fc, no dropout, no global average pooling
        spec.layers.push_back(fc(flat, 2048));
        spec.layers.push_back(fc(2048, 2));        // classification
        spec.side_layers.push_back(fc(2048, 4));   // box regression, parallel
    } else {
        spec.layers.push_back(fc(flat, 4096));
        spec.layers.push_back(fc(4096, 4096));
        spec.layers.push_back(fc(4096, 2));
        spec.side_layers.push_back(fc(4096, 4));
    }
    return spec;
}

ArchSpec combined_backbone(const std::string& name, const ArchSpec& sp,
                           const ArchSpec& cp, std::optional<double> reference) {
    ArchSpec spec;
    spec.name = name;
    spec.input = sp.input;
    spec.layers = sp.layers;
    // the context path runs in parallel on the same input
    append(spec.side_layers, cp.layers);
    append(spec.side_layers, cp.side_layers);
    spec.reference_params_m = reference;
    return spec;
}

}  // namespace

ArchSpec spatial_path_spec(int kernel, bool separable, int channels) {
    ArchSpec spec;
    spec.name = "sp";
    spec.input = {3, 512, 1024};
    int in = 3;
    for (int layer = 0; layer < 3; ++layer) {
        if (separable) {
            spec.layers.push_back(dw(in, kernel, 2));
            spec.layers.push_back(pw(in, channels));
        } else {
            spec.layers.push_back(conv(in, channels, kernel, 2));
        }
        spec.layers.push_back(bn(channels));
        in = channels;
    }
    return spec;
}

std::vector<ArchSpec> preset_variants() {
    std::vector<ArchSpec> presets;

    auto sp = [](const std::string& name, int k, bool sep, int ch) {
        ArchSpec spec = spatial_path_spec(k, sep, ch);
        spec.name = name;
        return spec;
    };
    presets.push_back(sp("sp", 3, false, 64));
    presets.push_back(sp("sp-5x5", 5, false, 64));
    presets.push_back(sp("sp-5x5dw", 5, true, 64));
    presets.push_back(sp("sp-5x5dw-addch", 5, true, 128));

    const ArchSpec res18 = resnet_backbone("resnet18-backbone", false, {2, 2, 2, 2});
    const ArchSpec res101 = resnet_backbone("resnet101-backbone", true, {3, 4, 23, 3});
    presets.push_back(res18);
    presets.push_back(res101);
    presets.push_back(resnet_classifier("resnet18-classifier", false, {2, 2, 2, 2}, 1000));
    presets.push_back(resnet_classifier("resnet101-classifier", true, {3, 4, 23, 3}, 1000));

    presets.push_back(combined_backbone("bnet-sp-cp", presets[0], res18, 12.5));
    presets.push_back(combined_backbone("bnet-sp-cp-5x5", presets[1], res18, 14.1));
    presets.push_back(combined_backbone("bnet-sp-cp-5x5dw", presets[2], res18, 11.7));
    presets.push_back(combined_backbone("bnet-sp-cp-5x5dw-addch", presets[3], res18, 12.2));

    presets.push_back(rpn_spec("rpn-baseline", false, 256));
    presets.push_back(rpn_spec("rpn-compressed", true, 256));
    presets.push_back(rcnn_head_spec("rcnn-head-baseline", false, 256));
    presets.push_back(rcnn_head_spec("rcnn-head-compact", true, 256));

    return presets;
}

ArchSpec preset(const std::string& name) {
    for (ArchSpec& spec : preset_variants()) {
        if (spec.name == name) return std::move(spec);
    }
    throw std::invalid_argument("unknown preset: " + name);
}

std::vector<RatioEntry> compression_ratio_report() {
    std::vector<RatioEntry> entries;
    const auto add = [&entries](const std::string& label, std::int64_t num,
                                std::int64_t den) {
        entries.push_back({label, num, den,
                           static_cast<double>(num) / static_cast<double>(den)});
    };

    const std::int64_t conv3 = layer_params(conv(64, 64, 3));
    const std::int64_t conv5 = layer_params(conv(64, 64, 5));
    const std::int64_t dw5 = layer_params(dw(64, 5));
    const std::int64_t sep5 = dw5 + layer_params(pw(64, 64));
    add("layer64: separable-5x5 / conv-5x5", sep5, conv5);
    add("layer64: separable-5x5 / conv-3x3", sep5, conv3);
    add("layer64: depthwise-5x5 / conv-5x5", dw5, conv5);
    add("layer64: depthwise-5x5 / conv-3x3", dw5, conv3);

    const std::int64_t path3 = model_params(spatial_path_spec(3, false, 64));
    const std::int64_t path5 = model_params(spatial_path_spec(5, false, 64));
    const std::int64_t path5sep = model_params(spatial_path_spec(5, true, 64));
    add("spatial-path: separable-5x5 / conv-5x5", path5sep, path5);
    add("spatial-path: separable-5x5 / conv-3x3", path5sep, path3);

    return entries;
}

}  // namespace pidkit
