#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pidkit/dataset.hpp"
#include "pidkit/mask_io.hpp"
#include "pidkit/random.hpp"
#include "test_util.hpp"

using namespace pidkit;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

const char* binary() {
    const char* bin = std::getenv("PIDKIT_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "PIDKIT_BIN must point at the pidkit binary");
    return bin;
}

CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const auto out_path = scratch / "stdout.txt";
    const std::string cmd = std::string(binary()) + " " + args + " > " +
                            out_path.string() + " 2> " +
                            (scratch / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    return result;
}

// Road across the bottom half of a 64x64 frame.
void write_fixture_mask(const std::filesystem::path& path) {
    BinaryMask mask(64, 64);
    for (int y = 32; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) mask.set(x, y);
    }
    write_mask_file(mask, path);
}

}  // namespace

TEST_CASE("validate exits 0/2/3 for ok, malformed, and semantic datasets") {
    test::TempDir dir("cli_validate");
    FrameRecord rec;
    rec.frame_id = "f0";
    rec.city = "aachen";
    rec.image_w = 64;
    rec.image_h = 64;
    rec.mask_ref = encode_mask_rle(BinaryMask(64, 64));
    rec.cases.push_back({BBox{1, 2, 11, 22}, false});

    const auto good = dir.path() / "good.jsonl";
    write_dataset({&rec, 1}, good);
    CHECK(run_cli("validate --dataset " + good.string(), dir.path()).exit_code == 0);

    const auto malformed = dir.path() / "malformed.jsonl";
    std::ofstream(malformed) << "{broken\n";
    CHECK(run_cli("validate --dataset " + malformed.string(), dir.path()).exit_code == 2);

    rec.cases[0].box.x_max = 999;
    const auto semantic = dir.path() / "semantic.jsonl";
    write_dataset({&rec, 1}, semantic);
    CHECK(run_cli("validate --dataset " + semantic.string(), dir.path()).exit_code == 3);
}

TEST_CASE("judge reads a mask and boxes and emits Y/N verdicts") {
    test::TempDir dir("cli_judge");
    const auto mask = dir.path() / "road.pgm";
    write_fixture_mask(mask);
    const auto boxes = dir.path() / "boxes.jsonl";
    std::ofstream(boxes)
        << R"({"x0":10,"y0":40,"x1":20,"y1":60,"confidence":0.95})" << '\n'
        << R"({"x0":0,"y0":0,"x1":10,"y1":10,"confidence":0.9})" << '\n'
        << R"({"x0":10,"y0":40,"x1":20,"y1":60,"confidence":0.5})" << '\n';
    const CliResult result = run_cli(
        "judge --mask " + mask.string() + " --boxes " + boxes.string(), dir.path());
    REQUIRE(result.exit_code == 0);
    std::istringstream lines(result.out);
    std::string line;
    std::vector<std::string> verdicts;
    while (std::getline(lines, line)) verdicts.push_back(line);
    REQUIRE(verdicts.size() == 2);  // low-confidence box gated out
    CHECK(verdicts[0].find("\"intrusion\":\"Y\"") != std::string::npos);
    CHECK(verdicts[1].find("\"intrusion\":\"N\"") != std::string::npos);
}

TEST_CASE("fuse labels boxes and writes a near-threshold review file") {
    test::TempDir dir("cli_fuse");
    const auto mask = dir.path() / "road.rle";
    write_fixture_mask(mask);
    const auto boxes = dir.path() / "boxes.jsonl";
    // overlaps: 200 (on road), 0 (off road), 24 (near p_t=20)
    std::ofstream(boxes) << R"({"x0":10,"y0":44,"x1":20,"y1":64})" << '\n'
                         << R"({"x0":0,"y0":0,"x1":10,"y1":10})" << '\n'
                         << R"({"x0":30,"y0":26,"x1":34,"y1":38})" << '\n';
    const auto review = dir.path() / "review.jsonl";
    const CliResult result =
        run_cli("fuse --mask " + mask.string() + " --boxes " + boxes.string() +
                    " --pt 20 --review " + review.string(),
                dir.path());
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("\"intrusion\":\"Y\"") != std::string::npos);
    CHECK(result.out.find("\"intrusion\":\"N\"") != std::string::npos);
    const std::string review_text = read_file(review);
    CHECK(review_text.find("\"index\":2") != std::string::npos);
    CHECK(review_text.find("\"overlap\":24") != std::string::npos);
}

TEST_CASE("stats reports counts and honors --drop-empty-frames") {
    test::TempDir dir("cli_stats");
    std::vector<FrameRecord> records;
    for (int i = 0; i < 3; ++i) {
        FrameRecord rec;
        rec.frame_id = "f" + std::to_string(i);
        rec.city = i == 0 ? "aachen" : "bonn";
        rec.image_w = 32;
        rec.image_h = 32;
        rec.mask_ref = encode_mask_rle(BinaryMask(32, 32));
        if (i < 2) {
            rec.cases.push_back({BBox{0, 0, 8, 8}, i == 0});
            rec.cases.push_back({BBox{8, 8, 16, 16}, false});
        }
        records.push_back(rec);
    }
    const auto path = dir.path() / "set.jsonl";
    write_dataset(records, path);

    const CliResult all = run_cli("stats --dataset " + path.string(), dir.path());
    REQUIRE(all.exit_code == 0);
    CHECK(all.out.find("images: 3") != std::string::npos);
    CHECK(all.out.find("cities: 2") != std::string::npos);
    CHECK(all.out.find("intrusion_cases: 1") != std::string::npos);
    CHECK(all.out.find("no_intrusion_cases: 3") != std::string::npos);

    const CliResult dropped = run_cli(
        "stats --dataset " + path.string() + " --drop-empty-frames", dir.path());
    CHECK(dropped.out.find("images: 2") != std::string::npos);
    CHECK(dropped.out.find("avg_cases_per_image: 2.00") != std::string::npos);
}

TEST_CASE("anchors dumps one box per line") {
    test::TempDir dir("cli_anchors");
    const CliResult result = run_cli("anchors --grid 2x3 --stride 16", dir.path());
    REQUIRE(result.exit_code == 0);
    std::istringstream lines(result.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++count;
    }
    CHECK(count == 2 * 3 * 25);
}

TEST_CASE("analyze-arch prints the resnet18 totals and the preset table") {
    test::TempDir dir("cli_arch");
    const CliResult one = run_cli(
        "analyze-arch --preset resnet18-backbone --csv", dir.path());
    REQUIRE(one.exit_code == 0);
    CHECK(one.out.find("resnet18-backbone,11176512,") != std::string::npos);

    const CliResult all = run_cli("analyze-arch --list --csv", dir.path());
    REQUIRE(all.exit_code == 0);
    CHECK(all.out.find("bnet-sp-cp-5x5dw-addch") != std::string::npos);
    CHECK(all.out.find("rcnn-head-compact") != std::string::npos);

    const CliResult ratios = run_cli("analyze-arch --ratios", dir.path());
    REQUIRE(ratios.exit_code == 0);
    CHECK(ratios.out.find("spatial-path") != std::string::npos);

    CHECK(run_cli("analyze-arch --preset nope", dir.path()).exit_code == 3);
}

TEST_CASE("simulate honors a config file with flag overrides") {
    test::TempDir dir("cli_sim");
    const auto config = dir.path() / "config.json";
    std::ofstream(config)
        << R"({"scenes": 4, "seed": 9, "jitter": 2, "mode": "fcm", "format": "csv"})";
    const auto out_a = dir.path() / "a.csv";
    const auto out_b = dir.path() / "b.csv";
    const CliResult a = run_cli("simulate --config " + config.string() + " --out " +
                                    out_a.string(),
                                dir.path());
    REQUIRE(a.exit_code == 0);
    // --seed on the command line beats the config seed
    const CliResult b = run_cli("simulate --config " + config.string() +
                                    " --seed 10 --out " + out_b.string(),
                                dir.path());
    REQUIRE(b.exit_code == 0);
    CHECK(read_file(out_a) != read_file(out_b));
    CHECK(read_file(out_a).find("pid_map,") != std::string::npos);

    CHECK(run_cli("simulate --scenes 1 --format bogus", dir.path()).exit_code == 3);
}

TEST_CASE("evaluate scores a dataset against a detections file") {
    test::TempDir dir("cli_eval");
    BinaryMask road(64, 64);
    for (int y = 32; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) road.set(x, y);
    }
    FrameRecord rec;
    rec.frame_id = "f0";
    rec.city = "aachen";
    rec.image_w = 64;
    rec.image_h = 64;
    rec.mask_ref = encode_mask_rle(road);
    rec.cases.push_back({BBox{10, 40, 20, 60}, true});
    rec.cases.push_back({BBox{0, 0, 10, 10}, false});
    const auto dataset = dir.path() / "set.jsonl";
    write_dataset({&rec, 1}, dataset);

    const auto dets = dir.path() / "dets.jsonl";
    std::ofstream(dets)
        << R"({"frame_id":"f0","x0":10,"y0":40,"x1":20,"y1":60,"confidence":0.95})"
        << '\n'
        << R"({"frame_id":"f0","x0":0,"y0":0,"x1":10,"y1":10,"confidence":0.9})"
        << '\n';
    const CliResult result =
        run_cli("evaluate --dataset " + dataset.string() + " --detections " +
                    dets.string(),
                dir.path());
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("PID_mAP: 1.000000") != std::string::npos);
    CHECK(result.out.find("PID_Acc: 1.000000") != std::string::npos);

    const auto bad = dir.path() / "bad.jsonl";
    std::ofstream(bad)
        << R"({"frame_id":"ghost","x0":0,"y0":0,"x1":5,"y1":5,"confidence":0.9})"
        << '\n';
    CHECK(run_cli("evaluate --dataset " + dataset.string() + " --detections " +
                      bad.string(),
                  dir.path())
              .exit_code == 3);
}
