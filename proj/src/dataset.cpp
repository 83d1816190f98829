#include "idcnn/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "idcnn/netpbm.hpp"

namespace idcnn {
namespace {

constexpr double kCubicA = -0.5;

double cubic_kernel(double x) {
    x = std::abs(x);
    if (x <= 1.0) return ((kCubicA + 2.0) * x - (kCubicA + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((kCubicA * x - 5.0 * kCubicA) * x + 8.0 * kCubicA) * x - 4.0 * kCubicA;
    return 0.0;
}

struct Taps {
    std::array<std::size_t, 4> index;
    std::array<double, 4> weight;
};

// Pixel-center aligned source taps for each output coordinate.
std::vector<Taps> resample_taps(std::size_t in_size, std::size_t out_size) {
    const double ratio = static_cast<double>(in_size) / static_cast<double>(out_size);
    std::vector<Taps> taps(out_size);
    for (std::size_t o = 0; o < out_size; ++o) {
        const double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
        const double base = std::floor(src);
        const double t = src - base;
        for (int k = 0; k < 4; ++k) {
            const auto pos = static_cast<std::ptrdiff_t>(base) + k - 1;
            taps[o].index[k] = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(pos, 0, static_cast<std::ptrdiff_t>(in_size) - 1));
            taps[o].weight[k] = cubic_kernel(t - static_cast<double>(k - 1));
        }
    }
    return taps;
}

constexpr const char kPatchMagic[9] = "IDCNNPAT";
constexpr std::uint32_t kPatchVersion = 1;

void emit_grid(const ColorImage& image, const NoiseMap& map, std::size_t p, const PatchOrigin& origin,
               const PatchSink& sink) {
    for (std::size_t r = 0; r < image.height() / p; ++r) {
        for (std::size_t c = 0; c < image.width() / p; ++c) {
            PatchOrigin o = origin;
            o.grid_row = static_cast<std::uint32_t>(r);
            o.grid_col = static_cast<std::uint32_t>(c);
            sink(Patch{crop(image, r * p, c * p, p, p), crop(map, r * p, c * p, p, p), o});
        }
    }
}

} // namespace

ColorImage bicubic_resize(const ColorImage& image, double scale) {
    require(scale > 0.0 && scale <= 1.0, "bicubic_resize: scale must lie in (0, 1]");
    if (scale == 1.0) return image;
    const auto out_h = static_cast<std::size_t>(std::llround(scale * static_cast<double>(image.height())));
    const auto out_w = static_cast<std::size_t>(std::llround(scale * static_cast<double>(image.width())));
    require(out_h >= 1 && out_w >= 1, "bicubic_resize: output would be empty");

    const auto col_taps = resample_taps(image.width(), out_w);
    const auto row_taps = resample_taps(image.height(), out_h);
    std::vector<double> horizontal(image.height() * out_w * 3);
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            const auto& t = col_taps[x];
            for (std::size_t c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += t.weight[k] * image.at(y, t.index[k], c);
                horizontal[(y * out_w + x) * 3 + c] = s;
            }
        }
    }
    ColorImage out(out_h, out_w);
    for (std::size_t y = 0; y < out_h; ++y) {
        const auto& t = row_taps[y];
        for (std::size_t x = 0; x < out_w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += t.weight[k] * horizontal[(t.index[k] * out_w + x) * 3 + c];
                out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::round(s), 0.0, 255.0));
            }
        }
    }
    return out;
}

std::vector<ColorImage> augment(const ColorImage& image) {
    std::vector<ColorImage> out;
    out.reserve(4);
    out.push_back(rotate90(image));
    out.push_back(rotate90(out.back()));
    out.push_back(rotate90(out.back()));
    out.push_back(flip_up_down(image));
    return out;
}

PatchSet extract_patches(const ColorImage& image, const NoiseMap& map, std::size_t p) {
    require(map.same_size(image), "extract_patches: map dimensions do not match the image");
    require(p >= 1 && p <= std::min(image.height(), image.width()),
            "extract_patches: patch size " + std::to_string(p) + " exceeds the image's smaller side");
    PatchSet set{p, {}};
    set.patches.reserve((image.height() / p) * (image.width() / p));
    emit_grid(image, map, p, PatchOrigin{}, [&](Patch&& patch) { set.patches.push_back(std::move(patch)); });
    return set;
}

void add_training_image(const ColorImage& clean, std::uint32_t image_id, const TrainingSetOptions& options,
                        const PatchSink& sink) {
    const std::size_t p = options.patch_size;
    require(p >= 1, "training set: patch size must be positive");
    const auto& noise = options.noise;
    if (noise.random) {
        require(0.0 <= noise.rho_min && noise.rho_min <= noise.rho_max && noise.rho_max <= 1.0,
                "training set: random noise range must satisfy 0 <= min <= max <= 1");
    }
    Rng rng(derive_seed(options.seed, image_id));
    for (const double scale : options.scales) {
        const ColorImage resized = bicubic_resize(clean, scale);
        std::vector<std::pair<Augmentation, ColorImage>> variants;
        variants.emplace_back(Augmentation::identity, resized);
        if (options.augment) {
            auto extra = augment(resized);
            for (std::size_t i = 0; i < extra.size(); ++i) {
                variants.emplace_back(static_cast<Augmentation>(i + 1), std::move(extra[i]));
            }
        }
        for (const auto& [kind, variant] : variants) {
            if (variant.height() < p || variant.width() < p) continue;
            PatchOrigin origin{image_id, scale, kind, 0, 0, noise.rho};
            if (!noise.random) {
                const auto corrupted = corrupt(variant, noise.model, noise.rho, rng);
                emit_grid(corrupted.noisy, corrupted.map, p, origin, sink);
                continue;
            }
            // Per-patch density: cut the clean grid, then corrupt each tile.
            const NoiseMap blank(variant.height(), variant.width(), 0);
            emit_grid(variant, blank, p, origin, [&](Patch&& patch) {
                patch.origin.rho = rng.uniform(noise.rho_min, noise.rho_max);
                auto corrupted = corrupt(patch.noisy, noise.model, patch.origin.rho, rng);
                patch.noisy = std::move(corrupted.noisy);
                patch.map = std::move(corrupted.map);
                sink(std::move(patch));
            });
        }
    }
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& directory) {
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec)) {
        throw DataError("'" + directory.string() + "' is not a readable directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .ppm images found in '" + directory.string() + "'");
    return files;
}

PatchSet build_training_set(const std::filesystem::path& directory, const TrainingSetOptions& options) {
    const auto files = list_images(directory);
    PatchSet set{options.patch_size, {}};
    for (std::size_t i = 0; i < files.size(); ++i) {
        const ColorImage image = load_ppm(files[i]);
        add_training_image(image, static_cast<std::uint32_t>(i), options,
                           [&](Patch&& patch) { set.patches.push_back(std::move(patch)); });
    }
    return set;
}

void write_patch_cache(std::ostream& out, const PatchSet& set) {
    using namespace detail;
    write_tag(out, kPatchMagic);
    write_u32(out, kPatchVersion);
    write_u64(out, set.patches.size());
    write_u32(out, static_cast<std::uint32_t>(set.patch_size));
    for (const auto& patch : set.patches) {
        require(patch.noisy.same_size(set.patch_size, set.patch_size) && patch.map.same_size(set.patch_size, set.patch_size),
                "patch cache: patch dimensions disagree with the set's patch size");
        out.write(reinterpret_cast<const char*>(patch.noisy.data().data()),
                  static_cast<std::streamsize>(patch.noisy.data().size()));
        out.write(reinterpret_cast<const char*>(patch.map.data().data()),
                  static_cast<std::streamsize>(patch.map.data().size()));
    }
}

PatchSet read_patch_cache(std::istream& in) {
    using namespace detail;
    const char* what = "patch cache";
    expect_tag(in, kPatchMagic, what);
    const auto version = read_u32(in, what);
    if (version != kPatchVersion) throw DataError("unsupported patch cache version " + std::to_string(version));
    const auto count = read_u64(in, what);
    const auto p = read_u32(in, what);
    if (p == 0 || p > 4096) throw DataError("patch cache declares an invalid patch size");
    PatchSet set{p, {}};
    for (std::uint64_t i = 0; i < count; ++i) {
        Patch patch{ColorImage(p, p), NoiseMap(p, p), {}};
        read_exact(in, reinterpret_cast<char*>(patch.noisy.data().data()), patch.noisy.data().size(), what);
        read_exact(in, reinterpret_cast<char*>(patch.map.data().data()), patch.map.data().size(), what);
        for (auto v : patch.map.data()) {
            if (v > 1) throw DataError("patch cache map is not binary");
        }
        set.patches.push_back(std::move(patch));
    }
    return set;
}

void save_patch_cache(const PatchSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    write_patch_cache(out, set);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

PatchSet load_patch_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return read_patch_cache(in);
}

} // namespace idcnn
