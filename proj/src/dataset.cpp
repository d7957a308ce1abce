#include "pidkit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pidkit/mask_io.hpp"

namespace pidkit {

std::string to_string(Split split) {
    return split == Split::Train ? "train" : "val";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    throw std::invalid_argument("split must be train or val, got: " + s);
}

std::vector<GroundTruthCase> fuse_labels(const BinaryMask& mask,
                                         std::span<const BBox> person_boxes,
                                         std::int64_t p_t) {
    std::vector<GroundTruthCase> cases;
    cases.reserve(person_boxes.size());
    for (const BBox& box : person_boxes) {
        cases.push_back({box, bbox_mask_overlap(box, mask) > p_t});
    }
    return cases;
}

std::vector<std::size_t> review_candidates(const BinaryMask& mask,
                                           std::span<const BBox> person_boxes,
                                           std::int64_t p_t, double band) {
    const double lo = (1.0 - band) * static_cast<double>(p_t);
    const double hi = (1.0 + band) * static_cast<double>(p_t);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < person_boxes.size(); ++i) {
        const auto overlap = static_cast<double>(bbox_mask_overlap(person_boxes[i], mask));
        if (overlap >= lo && overlap <= hi) out.push_back(i);
    }
    return out;
}

namespace {

using json = nlohmann::json;

int require_int(const json& j, const char* key, int line) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
        throw MalformedError(line, std::string("missing integer field '") + key + "'");
    }
    return j[key].get<int>();
}

std::string require_string(const json& j, const char* key, int line) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw MalformedError(line, std::string("missing string field '") + key + "'");
    }
    return j[key].get<std::string>();
}

FrameRecord parse_record(const json& j, int line) {
    if (!j.is_object()) throw MalformedError(line, "record must be an object");
    FrameRecord rec;
    rec.frame_id = require_string(j, "frame_id", line);
    rec.city = require_string(j, "city", line);
    try {
        rec.split = split_from_string(require_string(j, "split", line));
    } catch (const std::invalid_argument& e) {
        throw MalformedError(line, e.what());
    }
    rec.image_w = require_int(j, "width", line);
    rec.image_h = require_int(j, "height", line);
    rec.mask_ref = require_string(j, "mask", line);
    if (!j.contains("cases") || !j["cases"].is_array()) {
        throw MalformedError(line, "missing array field 'cases'");
    }
    for (const json& c : j["cases"]) {
        if (!c.is_object()) throw MalformedError(line, "case must be an object");
        GroundTruthCase gt;
        gt.box.x_min = require_int(c, "x0", line);
        gt.box.y_min = require_int(c, "y0", line);
        gt.box.x_max = require_int(c, "x1", line);
        gt.box.y_max = require_int(c, "y1", line);
        const std::string flag = require_string(c, "intrusion", line);
        if (flag != "Y" && flag != "N") {
            throw MalformedError(line, "intrusion must be Y or N");
        }
        gt.intrusion = flag == "Y";
        rec.cases.push_back(gt);
    }
    return rec;
}

void validate_record(const FrameRecord& rec, int line,
                     const std::filesystem::path& base_dir) {
    if (rec.image_w <= 0 || rec.image_h <= 0) {
        throw SemanticError(line, "frame dimensions must be positive");
    }
    for (const GroundTruthCase& gt : rec.cases) {
        if (!gt.box.valid()) {
            throw SemanticError(line, "degenerate case box in frame " + rec.frame_id);
        }
        if (gt.box.x_max > rec.image_w || gt.box.y_max > rec.image_h) {
            throw SemanticError(line, "case box exceeds frame bounds in " + rec.frame_id);
        }
    }
    if (!is_rle_text(rec.mask_ref)) {
        const auto mask_path = base_dir / rec.mask_ref;
        if (!std::filesystem::exists(mask_path)) {
            throw SemanticError(line, "mask file not found: " + mask_path.string());
        }
    }
}

json record_to_json(const FrameRecord& rec) {
    nlohmann::ordered_json j;
    j["frame_id"] = rec.frame_id;
    j["city"] = rec.city;
    j["split"] = to_string(rec.split);
    j["width"] = rec.image_w;
    j["height"] = rec.image_h;
    j["mask"] = rec.mask_ref;
    auto& cases = j["cases"] = nlohmann::ordered_json::array();
    for (const GroundTruthCase& gt : rec.cases) {
        cases.push_back({{"x0", gt.box.x_min},
                         {"y0", gt.box.y_min},
                         {"x1", gt.box.x_max},
                         {"y1", gt.box.y_max},
                         {"intrusion", gt.intrusion ? "Y" : "N"}});
    }
    return j;
}

}  // namespace

std::vector<FrameRecord> read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedError(0, "cannot open " + path.string());
    const auto base_dir = path.has_parent_path() ? path.parent_path()
                                                 : std::filesystem::path(".");
    std::vector<FrameRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw MalformedError(line_no, "invalid json record");
        FrameRecord rec = parse_record(j, line_no);
        validate_record(rec, line_no, base_dir);
        if (!seen_ids.insert(rec.frame_id).second) {
            throw SemanticError(line_no, "duplicate frame_id " + rec.frame_id);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string dataset_to_string(std::span<const FrameRecord> records) {
    std::vector<FrameRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const FrameRecord& a, const FrameRecord& b) {
                  return a.frame_id < b.frame_id;
              });
    for (FrameRecord& rec : sorted) {
        std::sort(rec.cases.begin(), rec.cases.end(),
                  [](const GroundTruthCase& a, const GroundTruthCase& b) {
                      return std::tuple(a.box.y_min, a.box.x_min, a.box.x_max, a.box.y_max) <
                             std::tuple(b.box.y_min, b.box.x_min, b.box.x_max, b.box.y_max);
                  });
    }
    std::ostringstream out;
    for (const FrameRecord& rec : sorted) out << record_to_json(rec).dump() << '\n';
    return out.str();
}

void write_dataset(std::span<const FrameRecord> records,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << dataset_to_string(records);
}

DatasetStats dataset_stats(std::span<const FrameRecord> records) {
    DatasetStats stats;
    std::set<std::string> cities;
    for (const FrameRecord& rec : records) {
        cities.insert(rec.city);
        ++stats.images;
        for (const GroundTruthCase& gt : rec.cases) {
            if (gt.intrusion) {
                ++stats.intrusion_cases;
            } else {
                ++stats.no_intrusion_cases;
            }
        }
    }
    stats.cities = static_cast<std::int64_t>(cities.size());
    stats.avg_cases_per_image =
        stats.images > 0
            ? static_cast<double>(stats.intrusion_cases + stats.no_intrusion_cases) /
                  static_cast<double>(stats.images)
            : 0.0;
    return stats;
}

BinaryMask load_mask(const FrameRecord& record,
                     const std::filesystem::path& base_dir) {
    if (is_rle_text(record.mask_ref)) return decode_mask_rle(record.mask_ref);
    return read_mask_file(base_dir / record.mask_ref);
}

}  // namespace pidkit
