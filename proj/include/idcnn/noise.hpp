#pragma once

#include <cstdint>
#include <string>

#include "idcnn/image.hpp"
#include "idcnn/random.hpp"

namespace idcnn {

enum class NoiseModel {
    ctri, ///< each channel of a hit pixel redrawn uniformly from 0..255
    spin, ///< each channel of a hit pixel set to 0 or 255 with equal odds
};

std::string to_string(NoiseModel model);
NoiseModel parse_noise_model(const std::string& name);

struct NoiseSpec {
    NoiseModel model = NoiseModel::ctri;
    double rho = 0.3;
    std::uint64_t seed = 0;
};

struct CorruptedImage {
    ColorImage noisy;
    /// Marks every selected pixel, even if its redrawn value equals the original.
    NoiseMap map;
};

/// Raster-order pass: one Bernoulli(rho) draw per pixel, then three channel
/// draws for each selected pixel. Unselected pixels are copied unchanged.
CorruptedImage corrupt_ctri(const ColorImage& image, double rho, Rng& rng);
CorruptedImage corrupt_spin(const ColorImage& image, double rho, Rng& rng);
CorruptedImage corrupt(const ColorImage& image, NoiseModel model, double rho, Rng& rng);
CorruptedImage corrupt(const ColorImage& image, const NoiseSpec& spec);

} // namespace idcnn
