#include <gtest/gtest.h>

#include "idcnn/oracles.hpp"
#include "idcnn/restore.hpp"

using namespace idcnn;

TEST(Restore, EmptyMapIsIdentity) {
    Rng rng(1);
    ColorImage img(7, 9);
    for (auto& v : img.data()) v = rng.byte();
    EXPECT_EQ(adaptive_mean_restore(img, NoiseMap(7, 9, 0)), img);
}

TEST(Restore, CenterPixelFromEightNeighbours) {
    ColorImage img(3, 3, 0);
    const std::uint8_t reds[8] = {10, 20, 30, 40, 50, 60, 70, 80};
    std::size_t k = 0;
    for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 3; ++x)
            img.at(y, x, 0) = (y == 1 && x == 1) ? 255 : reds[k++];
    NoiseMap map(3, 3, 0);
    map.at(1, 1) = 1;
    const auto out = adaptive_mean_restore_with_windows(img, map);
    EXPECT_EQ(out.image.at(1, 1, 0), 45);
    EXPECT_EQ(out.window_side.at(1, 1), 3u);
}

TEST(Restore, WindowGrowsPastFlaggedNeighbourhood) {
    ColorImage img(5, 5, 0);
    NoiseMap map(5, 5, 0);
    int ring_sum = 0;
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 5; ++x) {
            const bool inner = y >= 1 && y <= 3 && x >= 1 && x <= 3;
            if (inner) {
                map.at(y, x) = 1;
                img.at(y, x, 1) = 250;
            } else {
                img.at(y, x, 1) = static_cast<std::uint8_t>(y * 5 + x);
                ring_sum += static_cast<int>(y * 5 + x);
            }
        }
    const auto out = adaptive_mean_restore_with_windows(img, map);
    EXPECT_EQ(out.window_side.at(2, 2), 5u);
    EXPECT_EQ(out.image.at(2, 2, 1), static_cast<std::uint8_t>((2 * ring_sum + 16) / 32)); // 192 / 16 = 12
    EXPECT_EQ(out.image.at(2, 2, 1), 12);
}

TEST(Restore, RoundsHalfAwayFromZero) {
    ColorImage img(1, 3, 0);
    img.at(0, 0, 0) = 1;
    img.at(0, 2, 0) = 2;
    NoiseMap map(1, 3, 0);
    map.at(0, 1) = 1;
    EXPECT_EQ(adaptive_mean_restore(img, map).at(0, 1, 0), 2); // 1.5 -> 2
}

TEST(Restore, AllFlaggedIsRejected) {
    EXPECT_THROW(adaptive_mean_restore(ColorImage(4, 4), NoiseMap(4, 4, 1)), ContractError);
}

TEST(Restore, MaxSideLimitsSearch) {
    ColorImage img(1, 9, 0);
    NoiseMap map(1, 9, 1);
    map.at(0, 0) = 0;
    RestoreConfig cfg;
    cfg.max_side = 5;
    EXPECT_THROW(adaptive_mean_restore(img, map, cfg), ContractError);
}

TEST(Restore, MatchesBruteForceAndIsRotationEquivariant) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        ColorImage img(13, 11);
        for (auto& v : img.data()) v = rng.byte();
        NoiseMap map(13, 11);
        for (auto& v : map.data()) v = rng.bernoulli(0.1 + 0.08 * (trial % 10)) ? 1 : 0;
        map.at(0, 0) = 0;
        const auto out = adaptive_mean_restore(img, map);
        EXPECT_EQ(out, oracle::restore_brute(img, map));
        EXPECT_EQ(adaptive_mean_restore(rotate90(img), rotate90(map)), rotate90(out));
    }
}
