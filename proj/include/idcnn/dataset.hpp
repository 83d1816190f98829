#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "idcnn/image.hpp"
#include "idcnn/noise.hpp"

namespace idcnn {

/// Catmull-Rom (a = -0.5) bicubic resampling with edge clamping.
/// Output is round(scale * h) x round(scale * w); scale 1 returns the input.
ColorImage bicubic_resize(const ColorImage& image, double scale);

/// Exact geometric variants: rotations by 90, 180 and 270 degrees, then the
/// up-down flip. The input itself is not included.
std::vector<ColorImage> augment(const ColorImage& image);

enum class Augmentation : std::uint8_t { identity = 0, rot90 = 1, rot180 = 2, rot270 = 3, flip_ud = 4 };

struct PatchOrigin {
    std::uint32_t source = 0;
    double scale = 1.0;
    Augmentation augmentation = Augmentation::identity;
    std::uint32_t grid_row = 0;
    std::uint32_t grid_col = 0;
    double rho = 0.0;
};

struct Patch {
    ColorImage noisy;
    NoiseMap map;
    PatchOrigin origin;
};

struct PatchSet {
    std::size_t patch_size = 0;
    std::vector<Patch> patches;
};

/// Non-overlapping p x p tiles anchored at the top-left corner; the
/// remainder rows/columns are dropped. Yields floor(h/p) * floor(w/p) patches.
PatchSet extract_patches(const ColorImage& image, const NoiseMap& map, std::size_t p);

struct TrainingNoise {
    NoiseModel model = NoiseModel::ctri;
    double rho = 0.3;
    /// Draw rho per patch from U[rho_min, rho_max] instead of the fixed value.
    bool random = false;
    double rho_min = 0.1;
    double rho_max = 0.5;
};

struct TrainingSetOptions {
    std::size_t patch_size = 41;
    std::vector<double> scales = {1.0, 0.9, 0.8, 0.7};
    bool augment = false;
    TrainingNoise noise;
    std::uint64_t seed = 0;
};

using PatchSink = std::function<void(Patch&&)>;

/// Runs the per-image pipeline: resize to every scale, optionally augment,
/// corrupt each variant with fresh noise, cut patches. The noise stream is
/// seeded from derive_seed(options.seed, image_id), so images can be
/// processed independently and in any order.
void add_training_image(const ColorImage& clean, std::uint32_t image_id, const TrainingSetOptions& options,
                        const PatchSink& sink);

/// Sorted *.ppm files of a directory. Throws DataError if there are none.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& directory);

/// Applies add_training_image to every PPM in the directory (ids follow the
/// sorted file order).
PatchSet build_training_set(const std::filesystem::path& directory, const TrainingSetOptions& options);

/// Flat patch cache (see docs/file_formats.md); provenance is not stored.
void write_patch_cache(std::ostream& out, const PatchSet& set);
PatchSet read_patch_cache(std::istream& in);
void save_patch_cache(const PatchSet& set, const std::filesystem::path& path);
PatchSet load_patch_cache(const std::filesystem::path& path);

} // namespace idcnn
