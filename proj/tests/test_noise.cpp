#include <gtest/gtest.h>

#include <cmath>

#include "idcnn/noise.hpp"

using namespace idcnn;

namespace {

ColorImage gray(std::size_t h, std::size_t w, std::uint8_t v = 77) { return ColorImage(h, w, v); }

} // namespace

TEST(Noise, RhoZeroIsIdentity) {
    const auto img = gray(16, 16);
    for (auto model : {NoiseModel::ctri, NoiseModel::spin}) {
        Rng rng(1);
        const auto r = corrupt(img, model, 0.0, rng);
        EXPECT_EQ(r.noisy, img);
        EXPECT_EQ(count_flagged(r.map), 0u);
    }
}

TEST(Noise, RhoOneFlagsEverything) {
    Rng rng(2);
    EXPECT_EQ(count_flagged(corrupt_ctri(gray(9, 7), 1.0, rng).map), 63u);
}

TEST(Noise, RejectsOutOfRangeRho) {
    Rng rng(3);
    EXPECT_THROW(corrupt_ctri(gray(2, 2), 1.5, rng), ContractError);
    EXPECT_THROW(corrupt_spin(gray(2, 2), -0.1, rng), ContractError);
}

TEST(Noise, SameSeedSameOutput) {
    const auto img = gray(20, 20);
    const auto a = corrupt(img, NoiseSpec{NoiseModel::ctri, 0.3, 42});
    const auto b = corrupt(img, NoiseSpec{NoiseModel::ctri, 0.3, 42});
    EXPECT_EQ(a.noisy, b.noisy);
    EXPECT_EQ(a.map, b.map);
}

TEST(Noise, UnflaggedPixelsUntouched) {
    Rng rng(4);
    ColorImage img(32, 32);
    for (auto& v : img.data()) v = rng.byte();
    const auto r = corrupt_ctri(img, 0.4, rng);
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x)
            if (!r.map.at(y, x)) {
                for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(r.noisy.at(y, x, c), img.at(y, x, c));
            }
}

TEST(Noise, CtriCountAndUniformity) {
    const auto img = gray(256, 256);
    const double q = 65536.0;
    Rng rng(5);
    const auto r = corrupt_ctri(img, 0.3, rng);
    const double n = static_cast<double>(count_flagged(r.map));
    EXPECT_LT(std::abs(n - 0.3 * q), 4.0 * std::sqrt(q * 0.3 * 0.7));
    std::array<double, 8> bins{};
    double values = 0.0;
    for (std::size_t i = 0; i < r.map.pixels(); ++i) {
        if (!r.map.data()[i]) continue;
        for (std::size_t c = 0; c < 3; ++c) {
            bins[r.noisy.data()[3 * i + c] / 32] += 1.0;
            values += 1.0;
        }
    }
    for (double b : bins) EXPECT_LT(std::abs(b - values / 8.0), 5.0 * std::sqrt(values * 0.125 * 0.875));
}

TEST(Noise, SpinValuesAreExtremesAndBalanced) {
    Rng rng(6);
    const auto r = corrupt_spin(gray(128, 128), 0.5, rng);
    double zeros = 0.0, total = 0.0;
    for (std::size_t i = 0; i < r.map.pixels(); ++i) {
        if (!r.map.data()[i]) continue;
        for (std::size_t c = 0; c < 3; ++c) {
            const auto v = r.noisy.data()[3 * i + c];
            EXPECT_TRUE(v == 0 || v == 255);
            zeros += v == 0;
            total += 1.0;
        }
    }
    EXPECT_LT(std::abs(zeros / total - 0.5), 4.0 * std::sqrt(0.25 / total));
}

TEST(Noise, ModelNames) {
    EXPECT_EQ(parse_noise_model("ctri"), NoiseModel::ctri);
    EXPECT_EQ(to_string(NoiseModel::spin), "spin");
    EXPECT_THROW(parse_noise_model("gauss"), ContractError);
}
