#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pidkit {

/**
 * @brief Axis-aligned detection/groundtruth box in pixel coordinates.
 *
 * Half-open convention: the box covers pixel columns x_min..x_max-1 and
 * rows y_min..y_max-1, so area() is exact and adjacent boxes tile without
 * gaps or double counting.
 */
struct BBox {
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    int width() const { return x_max - x_min; }
    int height() const { return y_max - y_min; }
    std::int64_t area() const {
        return static_cast<std::int64_t>(width()) * height();
    }
    bool valid() const {
        return x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max;
    }
    bool operator==(const BBox&) const = default;
};

/// Crop rectangle (MBR or extended MBR). Same geometry as BBox, distinct role.
struct Rect {
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    int width() const { return x_max - x_min; }
    int height() const { return y_max - y_min; }
    std::int64_t area() const {
        return static_cast<std::int64_t>(width()) * height();
    }
    bool valid() const {
        return x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max;
    }
    bool contains(const Rect& other) const {
        return x_min <= other.x_min && y_min <= other.y_min &&
               x_max >= other.x_max && y_max >= other.y_max;
    }
    bool operator==(const Rect&) const = default;
};

/// Rectangle on the downsampled feature grid, half-open cell coordinates.
struct FeatureRect {
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    int stride = 1;

    bool operator==(const FeatureRect&) const = default;
};

enum class EmptyAoiPolicy { SkipDetection, FullFrame };

/// Crop extension settings. alpha extends the max coordinates only unless
/// symmetric is set (the min side already gains up to one feature cell of
/// slack from the grid mapping).
struct CropConfig {
    double alpha = 1.2;
    bool symmetric = false;
    EmptyAoiPolicy empty_aoi_policy = EmptyAoiPolicy::SkipDetection;
};

/**
 * @brief Row-major binary raster, one byte per pixel (nonzero = set).
 */
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    bool test(int x, int y) const {
        return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, bool value = true) {
        bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
    }
    /// Number of set pixels.
    std::int64_t count() const;

    std::span<const std::uint8_t> data() const { return bits_; }
    std::span<std::uint8_t> data() { return bits_; }

    bool operator==(const BinaryMask&) const = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

/// Tightest half-open rectangle covering all set pixels; nullopt when none.
std::optional<Rect> mbr_of_mask(const BinaryMask& mask);

/// Extends the max coordinates by alpha (nearest integer, ties away from
/// zero), clamping to the image bounds; with cfg.symmetric the min
/// coordinates are extended by the mirrored formula and clamped at 0.
Rect extend_rect(const Rect& rect, const CropConfig& cfg, int image_w, int image_h);

/// Maps a pixel rectangle onto the stride-s feature grid:
/// min sides ceil(v/s)-1 (clamped at 0), max sides floor(v/s)+1. The max
/// sides are deliberately left unclamped here; apply clamp_to_grid when the
/// image extent is known. Throws std::invalid_argument for stride < 1.
FeatureRect map_rect_to_feature(const Rect& rect, int stride);

/// Feature-grid extent for an image: (ceil(W/s), ceil(H/s)).
std::pair<int, int> feature_grid_extent(int image_w, int image_h, int stride);

/// Clamps a feature rectangle into the grid extent of the given image.
FeatureRect clamp_to_grid(FeatureRect fr, int image_w, int image_h);

/// Pixel region covered by a feature rectangle, clamped to the image.
Rect feature_rect_to_pixels(const FeatureRect& fr, int image_w, int image_h);

/// Number of set mask pixels inside the (clamped) half-open box.
std::int64_t bbox_mask_overlap(const BBox& box, const BinaryMask& mask);

/// Intersection over union under half-open integer areas; 0 when disjoint.
double bbox_iou(const BBox& a, const BBox& b);

/// Even-odd scanline rasterization sampled at pixel centers.
BinaryMask rasterize_polygon(std::span<const Vec2> vertices, int width, int height);

}  // namespace pidkit
