#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "pidkit/mask_io.hpp"
#include "pidkit/random.hpp"
#include "test_util.hpp"

using namespace pidkit;

TEST_CASE("rle text format for a small known mask") {
    BinaryMask mask(4, 2);
    mask.set(1, 0);
    mask.set(2, 0);
    mask.set(3, 1);
    CHECK(encode_mask_rle(mask) == "rle v1: 4 2 0 1 2 4 1");
    CHECK(decode_mask_rle("rle v1: 4 2 0 1 2 4 1") == mask);
}

TEST_CASE("rle round trip is identity") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = static_cast<int>(rng.uniform_int(1, 40));
        const int h = static_cast<int>(rng.uniform_int(1, 40));
        const auto mask = test::random_mask(rng, w, h, rng.uniform01());
        CHECK(decode_mask_rle(encode_mask_rle(mask)) == mask);
    }
}

TEST_CASE("rle rejects malformed inputs") {
    CHECK_THROWS_AS(decode_mask_rle("rle v2: 2 2 0 4"), MaskFormatError);
    CHECK_THROWS_AS(decode_mask_rle("rle v1: 2 2 0 3"), MaskFormatError);   // short
    CHECK_THROWS_AS(decode_mask_rle("rle v1: 2 2 0 5"), MaskFormatError);   // long
    CHECK_THROWS_AS(decode_mask_rle("rle v1: 2 2 2 4"), MaskFormatError);   // bad val0
    CHECK_THROWS_AS(decode_mask_rle("rle v1: 0 2 0"), MaskFormatError);     // bad dims
    CHECK_THROWS_AS(decode_mask_rle("rle v1: 2 2 0 2 x"), MaskFormatError); // non-int
}

TEST_CASE("pgm round trip is identity") {
    Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = static_cast<int>(rng.uniform_int(1, 33));
        const int h = static_cast<int>(rng.uniform_int(1, 33));
        const auto mask = test::random_mask(rng, w, h, rng.uniform01());
        std::stringstream buf;
        write_mask_pgm(mask, buf);
        CHECK(read_mask_pgm(buf) == mask);
    }
}

TEST_CASE("pgm reader handles comments and any nonzero value as set") {
    std::string data = "P5\n# a comment\n2 2\n255\n";
    data.push_back(char(7));
    data.push_back(char(0));
    data.push_back(char(255));
    data.push_back(char(0));
    std::istringstream in(data);
    const BinaryMask mask = read_mask_pgm(in);
    CHECK(mask.test(0, 0));
    CHECK(!mask.test(1, 0));
    CHECK(mask.test(0, 1));
    CHECK(!mask.test(1, 1));
}

TEST_CASE("pgm rejects bad magic, maxval, and truncation") {
    std::istringstream bad_magic("P6\n2 2\n255\n....");
    CHECK_THROWS_AS(read_mask_pgm(bad_magic), MaskFormatError);

    std::istringstream wide("P5\n2 2\n65535\n....");
    CHECK_THROWS_AS(read_mask_pgm(wide), MaskFormatError);

    std::istringstream truncated("P5\n4 4\n255\nab");
    CHECK_THROWS_AS(read_mask_pgm(truncated), MaskFormatError);
}

TEST_CASE("mask files round trip through both extensions with sniffing") {
    test::TempDir dir("maskio");
    Rng rng(33);
    const auto mask = test::random_mask(rng, 17, 9, 0.4);

    const auto pgm = dir.path() / "m.pgm";
    write_mask_file(mask, pgm);
    CHECK(read_mask_file(pgm) == mask);

    const auto rle = dir.path() / "m.rle";
    write_mask_file(mask, rle);
    CHECK(read_mask_file(rle) == mask);
}
