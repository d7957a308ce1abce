#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "pidkit/geometry.hpp"

namespace pidkit {

/// Thrown on unparseable mask bytes (bad magic, short data, run mismatch).
struct MaskFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// "rle v1: <width> <height> <val0> <run> <run> ..." — runs alternate
/// starting at val0, row-major, and must sum to width*height.
std::string encode_mask_rle(const BinaryMask& mask);
BinaryMask decode_mask_rle(std::string_view text);
bool is_rle_text(std::string_view text);

/// Binary portable graymap, magic P5, maxval <= 255; nonzero bytes are set.
void write_mask_pgm(const BinaryMask& mask, std::ostream& out);
BinaryMask read_mask_pgm(std::istream& in);

void write_mask_file(const BinaryMask& mask, const std::filesystem::path& path);

/// Reads either format, sniffing the leading magic.
BinaryMask read_mask_file(const std::filesystem::path& path);

}  // namespace pidkit
