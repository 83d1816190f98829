#pragma once

#include <cstddef>
#include <cstdint>

#include "idcnn/image.hpp"

namespace idcnn {

struct RestoreConfig {
    std::size_t initial_side = 3;
    std::size_t growth = 2;
    /// Largest window side tried; 0 means 2 * max(h, w) + 1 (covers the image).
    std::size_t max_side = 0;
};

/// Side of the window finally used for each pixel; 0 for unflagged pixels.
using WindowMap = Raster<std::uint32_t, 1>;

struct RestoreOutcome {
    ColorImage image;
    WindowMap window_side;
};

/// Adaptive arithmetic mean restoration of flagged pixels.
///
/// Each flagged pixel gets the per-channel mean of the originally unflagged
/// pixels inside the smallest centered odd window (3, 5, 7, ...) that holds
/// at least one of them. Windows are clipped at the borders, restored
/// pixels are never used as references (so the result does not depend on
/// processing order), and means are rounded half away from zero.
/// Unflagged pixels are copied bit-for-bit.
///
/// Throws ContractError if the map has no clean pixel, or if some flagged
/// pixel has none within max_side.
ColorImage adaptive_mean_restore(const ColorImage& noisy, const NoiseMap& map, const RestoreConfig& config = {});
RestoreOutcome adaptive_mean_restore_with_windows(const ColorImage& noisy, const NoiseMap& map,
                                                  const RestoreConfig& config = {});

} // namespace idcnn
