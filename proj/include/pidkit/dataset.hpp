#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pidkit/geometry.hpp"
#include "pidkit/metrics.hpp"

namespace pidkit {

enum class Split { Train, Val };

std::string to_string(Split split);
Split split_from_string(const std::string& s);  // throws on unknown value

/**
 * @brief One annotated frame: image extent, AoI mask reference, and its
 * labeled pedestrian cases.
 *
 * mask_ref is either an inline "rle v1: ..." string or a path resolved
 * relative to the dataset file.
 */
struct FrameRecord {
    std::string frame_id;
    std::string city;
    Split split = Split::Train;
    int image_w = 0, image_h = 0;
    std::string mask_ref;
    std::vector<GroundTruthCase> cases;

    bool operator==(const FrameRecord&) const = default;
};

struct DatasetStats {
    std::int64_t cities = 0;
    std::int64_t images = 0;
    std::int64_t intrusion_cases = 0;
    std::int64_t no_intrusion_cases = 0;
    double avg_cases_per_image = 0.0;
};

/// Unparseable input (bad JSON, missing/mistyped fields). line is 1-based,
/// 0 when no position applies. CLI exit code 2.
struct MalformedError : std::runtime_error {
    int line;
    MalformedError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
          line(line_) {}
};

/// Well-formed input violating dataset semantics (out-of-bounds box,
/// duplicate frame_id, missing mask file). CLI exit code 3.
struct SemanticError : std::runtime_error {
    int line;
    SemanticError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
          line(line_) {}
};

/// Labels each box intrusion iff its overlap with the mask exceeds p_t —
/// the same rule the runtime judgment applies, so construction labels and
/// judgments agree by definition.
std::vector<GroundTruthCase> fuse_labels(const BinaryMask& mask,
                                         std::span<const BBox> person_boxes,
                                         std::int64_t p_t);

/// Indices of boxes whose overlap lies within +-band of p_t: the manual
/// review candidates.
std::vector<std::size_t> review_candidates(const BinaryMask& mask,
                                           std::span<const BBox> person_boxes,
                                           std::int64_t p_t, double band = 0.25);

/// Line-delimited records; validates bounds, duplicate ids, and (for path
/// mask_refs) that the mask file exists next to the dataset file.
std::vector<FrameRecord> read_dataset(const std::filesystem::path& path);

/// Canonical form: frames sorted by frame_id, cases by (y_min, x_min,
/// x_max, y_max), fixed key order. write(read(f)) is byte-stable.
void write_dataset(std::span<const FrameRecord> records,
                   const std::filesystem::path& path);

std::string dataset_to_string(std::span<const FrameRecord> records);

DatasetStats dataset_stats(std::span<const FrameRecord> records);

/// Materializes a record's mask (inline RLE or referenced file).
BinaryMask load_mask(const FrameRecord& record,
                     const std::filesystem::path& base_dir);

}  // namespace pidkit
