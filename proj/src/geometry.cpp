#include "pidkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pidkit {

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("BinaryMask dimensions must be positive");
    }
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::int64_t BinaryMask::count() const {
    std::int64_t n = 0;
    for (std::uint8_t b : bits_) n += b ? 1 : 0;
    return n;
}

std::optional<Rect> mbr_of_mask(const BinaryMask& mask) {
    int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.test(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return Rect{x0, y0, x1 + 1, y1 + 1};
}

Rect extend_rect(const Rect& rect, const CropConfig& cfg, int image_w, int image_h) {
    if (cfg.alpha < 1.0) {
        throw std::invalid_argument("extension coefficient must be >= 1");
    }
    const long ex = std::lround(cfg.alpha * rect.width());
    const long ey = std::lround(cfg.alpha * rect.height());
    Rect out = rect;
    out.x_max = static_cast<int>(std::min<long>(image_w, rect.x_min + ex));
    out.y_max = static_cast<int>(std::min<long>(image_h, rect.y_min + ey));
    if (cfg.symmetric) {
        out.x_min = static_cast<int>(std::max<long>(0, rect.x_max - ex));
        out.y_min = static_cast<int>(std::max<long>(0, rect.y_max - ey));
    }
    return out;
}

namespace {
int ceil_div(int a, int s) { return (a + s - 1) / s; }
}  // namespace

FeatureRect map_rect_to_feature(const Rect& rect, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    FeatureRect fr;
    fr.stride = stride;
    fr.x_min = std::max(0, ceil_div(rect.x_min, stride) - 1);
    fr.y_min = std::max(0, ceil_div(rect.y_min, stride) - 1);
    fr.x_max = rect.x_max / stride + 1;
    fr.y_max = rect.y_max / stride + 1;
    return fr;
}

std::pair<int, int> feature_grid_extent(int image_w, int image_h, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    return {ceil_div(image_w, stride), ceil_div(image_h, stride)};
}

FeatureRect clamp_to_grid(FeatureRect fr, int image_w, int image_h) {
    const auto [gw, gh] = feature_grid_extent(image_w, image_h, fr.stride);
    fr.x_min = std::clamp(fr.x_min, 0, gw);
    fr.y_min = std::clamp(fr.y_min, 0, gh);
    fr.x_max = std::clamp(fr.x_max, 0, gw);
    fr.y_max = std::clamp(fr.y_max, 0, gh);
    return fr;
}

Rect feature_rect_to_pixels(const FeatureRect& fr, int image_w, int image_h) {
    Rect r;
    r.x_min = fr.x_min * fr.stride;
    r.y_min = fr.y_min * fr.stride;
    r.x_max = std::min(fr.x_max * fr.stride, image_w);
    r.y_max = std::min(fr.y_max * fr.stride, image_h);
    return r;
}

std::int64_t bbox_mask_overlap(const BBox& box, const BinaryMask& mask) {
    const int x0 = std::clamp(box.x_min, 0, mask.width());
    const int x1 = std::clamp(box.x_max, 0, mask.width());
    const int y0 = std::clamp(box.y_min, 0, mask.height());
    const int y1 = std::clamp(box.y_max, 0, mask.height());
    std::int64_t n = 0;
    const auto bits = mask.data();
    for (int y = y0; y < y1; ++y) {
        const std::uint8_t* row = bits.data() + static_cast<std::size_t>(y) * mask.width();
        for (int x = x0; x < x1; ++x) n += row[x] ? 1 : 0;
    }
    return n;
}

double bbox_iou(const BBox& a, const BBox& b) {
    const std::int64_t iw = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const std::int64_t ih = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const std::int64_t inter = iw * ih;
    const std::int64_t uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

BinaryMask rasterize_polygon(std::span<const Vec2> vertices, int width, int height) {
    if (vertices.size() < 3) {
        throw std::invalid_argument("polygon needs at least 3 vertices");
    }
    BinaryMask mask(width, height);
    std::vector<double> crossings;
    for (int y = 0; y < height; ++y) {
        const double yc = y + 0.5;
        crossings.clear();
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec2& a = vertices[i];
            const Vec2& b = vertices[(i + 1) % vertices.size()];
            if ((a.y <= yc) == (b.y <= yc)) continue;
            crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
            // pixel x is inside iff x + 0.5 lies in [left, right)
            int xs = static_cast<int>(std::ceil(crossings[i] - 0.5));
            int xe = static_cast<int>(std::ceil(crossings[i + 1] - 0.5));
            xs = std::max(xs, 0);
            xe = std::min(xe, width);
            for (int x = xs; x < xe; ++x) mask.set(x, y);
        }
    }
    return mask;
}

}  // namespace pidkit
