#include "pidkit/mask_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace pidkit {

namespace {
constexpr std::string_view kRleMagic = "rle v1:";
}

bool is_rle_text(std::string_view text) {
    return text.substr(0, kRleMagic.size()) == kRleMagic;
}

std::string encode_mask_rle(const BinaryMask& mask) {
    std::ostringstream out;
    out << kRleMagic << ' ' << mask.width() << ' ' << mask.height();
    const auto bits = mask.data();
    const std::uint8_t first = bits.empty() ? 0 : (bits[0] ? 1 : 0);
    out << ' ' << int(first);
    std::uint8_t current = first;
    std::int64_t run = 0;
    for (std::uint8_t b : bits) {
        const std::uint8_t v = b ? 1 : 0;
        if (v == current) {
            ++run;
        } else {
            out << ' ' << run;
            current = v;
            run = 1;
        }
    }
    out << ' ' << run;
    return out.str();
}

BinaryMask decode_mask_rle(std::string_view text) {
    if (!is_rle_text(text)) throw MaskFormatError("not an rle v1 mask");
    std::istringstream in(std::string(text.substr(kRleMagic.size())));
    int width = 0, height = 0, val0 = -1;
    if (!(in >> width >> height >> val0)) {
        throw MaskFormatError("rle header: expected <width> <height> <val0>");
    }
    if (width <= 0 || height <= 0 || (val0 != 0 && val0 != 1)) {
        throw MaskFormatError("rle header: bad dimensions or start value");
    }
    BinaryMask mask(width, height);
    auto bits = mask.data();
    const std::int64_t total = static_cast<std::int64_t>(width) * height;
    std::int64_t pos = 0;
    std::uint8_t value = static_cast<std::uint8_t>(val0);
    std::int64_t run = 0;
    while (in >> run) {
        if (run < 0 || pos + run > total) {
            throw MaskFormatError("rle runs exceed width*height");
        }
        if (value) std::fill_n(bits.begin() + pos, run, std::uint8_t{1});
        pos += run;
        value = value ? 0 : 1;
    }
    if (!in.eof()) throw MaskFormatError("rle runs: expected integers");
    if (pos != total) throw MaskFormatError("rle runs do not cover width*height");
    return mask;
}

void write_mask_pgm(const BinaryMask& mask, std::ostream& out) {
    out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
    std::vector<char> row(static_cast<std::size_t>(mask.width()));
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            row[static_cast<std::size_t>(x)] = mask.test(x, y) ? char(255) : char(0);
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

namespace {

// Next whitespace-delimited token, skipping '#' comments (standard PNM headers).
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int parse_pgm_int(std::istream& in, const char* what) {
    const std::string tok = next_pgm_token(in);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw MaskFormatError(std::string("pgm header: bad ") + what);
    }
}

}  // namespace

BinaryMask read_mask_pgm(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') {
        throw MaskFormatError("pgm: missing P5 magic");
    }
    const int width = parse_pgm_int(in, "width");
    const int height = parse_pgm_int(in, "height");
    const int maxval = parse_pgm_int(in, "maxval");
    if (width <= 0 || height <= 0) throw MaskFormatError("pgm: bad dimensions");
    if (maxval <= 0 || maxval > 255) {
        throw MaskFormatError("pgm: maxval must be in 1..255");
    }
    // exactly one whitespace byte separates the header from the raster
    BinaryMask mask(width, height);
    std::vector<char> row(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        in.read(row.data(), static_cast<std::streamsize>(row.size()));
        if (in.gcount() != static_cast<std::streamsize>(row.size())) {
            throw MaskFormatError("pgm: truncated raster");
        }
        for (int x = 0; x < width; ++x) {
            if (row[static_cast<std::size_t>(x)] != 0) mask.set(x, y);
        }
    }
    return mask;
}

void write_mask_file(const BinaryMask& mask, const std::filesystem::path& path) {
    if (path.extension() == ".rle") {
        std::ofstream out(path);
        if (!out) throw MaskFormatError("cannot open " + path.string());
        out << encode_mask_rle(mask) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MaskFormatError("cannot open " + path.string());
    write_mask_pgm(mask, out);
}

BinaryMask read_mask_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MaskFormatError("cannot open " + path.string());
    char head[8] = {};
    in.read(head, sizeof head);
    const std::string_view sniff(head, static_cast<std::size_t>(in.gcount()));
    in.clear();
    in.seekg(0);
    if (sniff.substr(0, 2) == "P5") return read_mask_pgm(in);
    if (is_rle_text(sniff)) {
        std::ostringstream buf;
        buf << in.rdbuf();
        return decode_mask_rle(buf.str());
    }
    throw MaskFormatError("unrecognized mask format in " + path.string());
}

}  // namespace pidkit
