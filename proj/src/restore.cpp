#include "idcnn/restore.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "idcnn/parallel.hpp"

namespace idcnn {
namespace {

// Summed-area tables over clean pixels: count and per-channel sums.
class CleanIntegral {
public:
    CleanIntegral(const ColorImage& image, const NoiseMap& map)
        : stride_(image.width() + 1), table_((image.height() + 1) * stride_) {
        for (std::size_t y = 0; y < image.height(); ++y) {
            Entry row{};
            for (std::size_t x = 0; x < image.width(); ++x) {
                if (map.at(y, x) == 0) {
                    row[0] += 1;
                    for (std::size_t c = 0; c < 3; ++c) row[c + 1] += image.at(y, x, c);
                }
                const Entry& above = table_[y * stride_ + x + 1];
                Entry& cell = table_[(y + 1) * stride_ + x + 1];
                for (std::size_t k = 0; k < 4; ++k) cell[k] = above[k] + row[k];
            }
        }
    }

    using Entry = std::array<std::int64_t, 4>;

    // Sums over rows [y0, y1) and columns [x0, x1).
    Entry query(std::size_t y0, std::size_t x0, std::size_t y1, std::size_t x1) const {
        Entry out;
        for (std::size_t k = 0; k < 4; ++k) {
            out[k] = table_[y1 * stride_ + x1][k] - table_[y0 * stride_ + x1][k] - table_[y1 * stride_ + x0][k] +
                     table_[y0 * stride_ + x0][k];
        }
        return out;
    }

private:
    std::size_t stride_;
    std::vector<Entry> table_;
};

// Nearest integer, ties away from zero, for non-negative sum / count.
std::uint8_t rounded_mean(std::int64_t sum, std::int64_t count) {
    return static_cast<std::uint8_t>((2 * sum + count) / (2 * count));
}

} // namespace

RestoreOutcome adaptive_mean_restore_with_windows(const ColorImage& noisy, const NoiseMap& map,
                                                  const RestoreConfig& config) {
    require(map.same_size(noisy), "restore: noise map dimensions do not match the image");
    require(config.initial_side >= 3 && config.initial_side % 2 == 1, "restore: initial window side must be odd and >= 3");
    require(config.growth >= 2 && config.growth % 2 == 0, "restore: window growth must be a positive even step");
    const std::size_t h = noisy.height();
    const std::size_t w = noisy.width();
    const std::size_t max_side = config.max_side == 0 ? 2 * std::max(h, w) + 1 : config.max_side;
    require(max_side >= config.initial_side && max_side % 2 == 1, "restore: maximum window side must be odd and >= initial side");

    RestoreOutcome out{noisy, WindowMap(h, w, 0)};
    const std::size_t flagged = count_flagged(map);
    if (flagged == 0) return out;
    require(flagged < map.pixels(), "restore: no reference pixels (every pixel is flagged)");

    const CleanIntegral integral(noisy, map);
    std::vector<std::size_t> failures(h, 0);
    parallel_for(h, [&](std::size_t y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (map.at(y, x) == 0) continue;
            bool restored = false;
            for (std::size_t side = config.initial_side; side <= max_side; side += config.growth) {
                const std::size_t r = side / 2;
                const std::size_t y0 = y >= r ? y - r : 0;
                const std::size_t x0 = x >= r ? x - r : 0;
                const std::size_t y1 = std::min(h, y + r + 1);
                const std::size_t x1 = std::min(w, x + r + 1);
                const auto sums = integral.query(y0, x0, y1, x1);
                if (sums[0] == 0) continue;
                for (std::size_t c = 0; c < 3; ++c) out.image.at(y, x, c) = rounded_mean(sums[c + 1], sums[0]);
                out.window_side.at(y, x) = static_cast<std::uint32_t>(side);
                restored = true;
                break;
            }
            if (!restored) ++failures[y];
        }
    });
    for (std::size_t y = 0; y < h; ++y) {
        require(failures[y] == 0, "restore: no reference pixels within the maximum window of side " +
                                      std::to_string(max_side) + " (row " + std::to_string(y) + ")");
    }
    return out;
}

ColorImage adaptive_mean_restore(const ColorImage& noisy, const NoiseMap& map, const RestoreConfig& config) {
    return adaptive_mean_restore_with_windows(noisy, map, config).image;
}

} // namespace idcnn
