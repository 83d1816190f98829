#pragma once

#include <filesystem>
#include <iosfwd>

#include "idcnn/image.hpp"

namespace idcnn {

/// Binary netpbm I/O. Headers are written as "P6 <w> <h> 255\n" followed
/// by raw samples; readers accept any whitespace and '#' comments.

ColorImage read_ppm(std::istream& in);
void write_ppm(std::ostream& out, const ColorImage& image);
ColorImage load_ppm(const std::filesystem::path& path);
void save_ppm(const ColorImage& image, const std::filesystem::path& path);

/// Binary maps as 8-bit P5 with values 0 and 255. On load, 0 is clean and
/// any other value is flagged.
NoiseMap read_map_pgm(std::istream& in);
void write_map_pgm(std::ostream& out, const NoiseMap& map);
NoiseMap load_map_pgm(const std::filesystem::path& path);
void save_map_pgm(const NoiseMap& map, const std::filesystem::path& path);

/// Probability maps as 16-bit big-endian P5, sample = round(65535 * p).
void write_probability_pgm(std::ostream& out, const ProbabilityMap& map);
ProbabilityMap read_probability_pgm(std::istream& in);
void save_probability_pgm(const ProbabilityMap& map, const std::filesystem::path& path);
ProbabilityMap load_probability_pgm(const std::filesystem::path& path);

} // namespace idcnn
