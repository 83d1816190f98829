#include "idcnn/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace idcnn {
namespace {

struct Header {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 0;
};

void skip_space_and_comments(std::istream& in) {
    for (;;) {
        const int ch = in.peek();
        if (ch == '#') {
            in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        } else if (ch != EOF && std::isspace(ch)) {
            in.get();
        } else {
            return;
        }
    }
}

std::size_t read_header_number(std::istream& in, const char* field) {
    skip_space_and_comments(in);
    std::string digits;
    while (std::isdigit(in.peek())) digits.push_back(static_cast<char>(in.get()));
    if (digits.empty() || digits.size() > 9) throw DataError(std::string("malformed netpbm header: bad ") + field);
    return std::stoul(digits);
}

Header read_header(std::istream& in, const char* magic) {
    char m[2] = {0, 0};
    in.read(m, 2);
    if (in.gcount() != 2 || m[0] != magic[0] || m[1] != magic[1]) {
        throw DataError(std::string("malformed netpbm header: expected magic ") + magic);
    }
    Header h;
    h.width = read_header_number(in, "width");
    h.height = read_header_number(in, "height");
    h.maxval = static_cast<unsigned>(read_header_number(in, "maxval"));
    if (h.width == 0 || h.height == 0) throw DataError("malformed netpbm header: zero dimension");
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) throw DataError("malformed netpbm header: missing separator before data");
    return h;
}

void read_samples(std::istream& in, std::vector<std::uint8_t>& dst) {
    in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size()));
    if (static_cast<std::size_t>(in.gcount()) != dst.size()) {
        throw DataError("truncated netpbm data: expected " + std::to_string(dst.size()) + " bytes, got " +
                        std::to_string(in.gcount()));
    }
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string header_line(const char* magic, std::size_t w, std::size_t h, unsigned maxval) {
    return std::string(magic) + " " + std::to_string(w) + " " + std::to_string(h) + " " + std::to_string(maxval) + "\n";
}

} // namespace

ColorImage read_ppm(std::istream& in) {
    const Header h = read_header(in, "P6");
    if (h.maxval != 255) throw DataError("unsupported PPM maxval " + std::to_string(h.maxval) + " (need 255)");
    std::vector<std::uint8_t> data(h.width * h.height * 3);
    read_samples(in, data);
    return ColorImage(h.height, h.width, std::move(data));
}

void write_ppm(std::ostream& out, const ColorImage& image) {
    out << header_line("P6", image.width(), image.height(), 255);
    out.write(reinterpret_cast<const char*>(image.data().data()), static_cast<std::streamsize>(image.data().size()));
}

ColorImage load_ppm(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_ppm(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save_ppm(const ColorImage& image, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_ppm(out, image);
    finish(out, path);
}

NoiseMap read_map_pgm(std::istream& in) {
    const Header h = read_header(in, "P5");
    if (h.maxval != 255) throw DataError("unsupported map PGM maxval " + std::to_string(h.maxval) + " (need 255)");
    std::vector<std::uint8_t> data(h.width * h.height);
    read_samples(in, data);
    for (auto& v : data) v = v != 0 ? 1 : 0;
    return NoiseMap(h.height, h.width, std::move(data));
}

void write_map_pgm(std::ostream& out, const NoiseMap& map) {
    out << header_line("P5", map.width(), map.height(), 255);
    std::vector<std::uint8_t> bytes(map.data().size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = map.data()[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

NoiseMap load_map_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_map_pgm(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save_map_pgm(const NoiseMap& map, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_map_pgm(out, map);
    finish(out, path);
}

void write_probability_pgm(std::ostream& out, const ProbabilityMap& map) {
    out << header_line("P5", map.width(), map.height(), 65535);
    std::vector<std::uint8_t> bytes(map.data().size() * 2);
    for (std::size_t i = 0; i < map.data().size(); ++i) {
        const double p = std::clamp(static_cast<double>(map.data()[i]), 0.0, 1.0);
        const auto sample = static_cast<std::uint16_t>(std::lround(65535.0 * p));
        bytes[2 * i] = static_cast<std::uint8_t>(sample >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(sample & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ProbabilityMap read_probability_pgm(std::istream& in) {
    const Header h = read_header(in, "P5");
    if (h.maxval != 65535) throw DataError("probability PGM must be 16-bit (maxval 65535)");
    std::vector<std::uint8_t> bytes(h.width * h.height * 2);
    read_samples(in, bytes);
    ProbabilityMap map(h.height, h.width);
    for (std::size_t i = 0; i < map.data().size(); ++i) {
        const unsigned sample = (static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1];
        map.data()[i] = static_cast<float>(sample / 65535.0);
    }
    return map;
}

void save_probability_pgm(const ProbabilityMap& map, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_probability_pgm(out, map);
    finish(out, path);
}

ProbabilityMap load_probability_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_probability_pgm(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace idcnn
