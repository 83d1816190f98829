#include <gtest/gtest.h>

#include <sstream>

#include "idcnn/detector.hpp"
#include "idcnn/noise.hpp"
#include "idcnn/train.hpp"

using namespace idcnn;

namespace {

ColorImage smooth_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    const double fx = rng.uniform(0.05, 0.2), fy = rng.uniform(0.05, 0.2);
    ColorImage img(h, w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                img.at(y, x, c) = static_cast<std::uint8_t>(128 + 100 * std::sin(fx * x + fy * y + 2.0 * c));
    return img;
}

PatchSet toy_patches(std::size_t count, std::size_t p, std::uint64_t seed) {
    PatchSet set{p, {}};
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        auto c = corrupt(smooth_image(p, p, seed + i), NoiseModel::ctri, 0.3, rng);
        set.patches.push_back(Patch{std::move(c.noisy), std::move(c.map), {}});
    }
    return set;
}

TrainConfig toy_config() {
    TrainConfig c;
    c.depth = 3;
    c.filters = 4;
    c.epochs = 3;
    c.batch_size = 4;
    c.patch_size = 21;
    c.seed = 5;
    return c;
}

} // namespace

TEST(Model, FullSizeLayerCounts) {
    Rng rng(1);
    const auto model = build_model<float>(17, 64, rng);
    const auto counts = count_layers(model.net);
    EXPECT_EQ(counts.conv, 17u);
    EXPECT_EQ(counts.batchnorm, 15u);
    EXPECT_EQ(counts.relu, 16u);
    EXPECT_EQ(counts.sigmoid, 1u);
    EXPECT_NO_THROW(validate_architecture(model));
}

TEST(Model, MinimalModelRunsAndOutputsProbabilities) {
    Rng rng(2);
    const auto model = build_model<float>(3, 1, rng);
    Rng px(3);
    ColorImage img(8, 8);
    for (auto& v : img.data()) v = px.byte();
    const auto prob = predict_probability(model, img);
    EXPECT_EQ(prob.height(), 8u);
    EXPECT_EQ(prob.width(), 8u);
    for (float v : prob.data()) {
        EXPECT_GT(v, 0.0f);
        EXPECT_LT(v, 1.0f);
    }
}

TEST(Model, SameSeedSameInitialParameters) {
    Rng a(9), b(9);
    auto m1 = build_model<float>(4, 3, a);
    auto m2 = build_model<float>(4, 3, b);
    const auto p1 = m1.net.parameters();
    const auto p2 = m2.net.parameters();
    ASSERT_EQ(p1.size(), p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        EXPECT_TRUE(std::equal(p1[i].value.begin(), p1[i].value.end(), p2[i].value.begin()));
    }
}

TEST(Model, RejectsTooShallow) {
    Rng rng(1);
    EXPECT_THROW(build_model<float>(2, 4, rng), ContractError);
}

TEST(TrainConfig, DefaultsAndSchedule) {
    const TrainConfig c;
    EXPECT_EQ(c.depth, 17u);
    EXPECT_EQ(c.filters, 64u);
    EXPECT_EQ(c.epochs, 50u);
    EXPECT_EQ(c.batch_size, 128u);
    EXPECT_EQ(c.patch_size, 41u);
    EXPECT_DOUBLE_EQ(learning_rate(c, 1), 1e-3);
    EXPECT_DOUBLE_EQ(learning_rate(c, 30), 1e-3);
    EXPECT_DOUBLE_EQ(learning_rate(c, 31), 1e-4);
    EXPECT_DOUBLE_EQ(learning_rate(c, 50), 1e-4);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    c.patch_size = 20;
    EXPECT_THROW(c.validate(), ContractError);
    c = TrainConfig{};
    c.lr = 0.0;
    EXPECT_THROW(c.validate(), ContractError);
    c = TrainConfig{};
    c.lr_decay = 1.5;
    EXPECT_THROW(c.validate(), ContractError);
    c = TrainConfig{};
    c.epochs = 0;
    EXPECT_THROW(c.validate(), ContractError);
}

TEST(TrainConfig, TextRoundTrip) {
    TrainConfig c = toy_config();
    c.lr = 0.0123456789;
    c.noise.random = true;
    c.noise.model = NoiseModel::spin;
    const auto back = parse_config(format_config(c));
    EXPECT_EQ(format_config(back), format_config(c));
    EXPECT_THROW(parse_config("depth=abc\n"), DataError);
    EXPECT_THROW(parse_config("nonsense=1\n"), DataError);
}

TEST(Train, OverfitsTenPatches) {
    auto patches = toy_patches(10, 21, 11);
    auto config = toy_config();
    config.depth = 4;
    config.filters = 8;
    config.epochs = 200;
    config.decay_epoch = 200;
    config.lr = 1e-2;
    config.batch_size = 10;
    Rng rng(config.seed);
    auto model = build_model<float>(config.depth, config.filters, rng);
    const auto state = train(model, patches, config);
    ASSERT_EQ(state.loss_history.size(), 200u);
    EXPECT_LT(state.loss_history.back(), 0.1 * state.loss_history.front());
}

TEST(Train, DeterministicLossHistory) {
    const auto patches = toy_patches(12, 21, 3);
    const auto config = toy_config();
    Rng a(config.seed), b(config.seed);
    auto m1 = build_model<float>(config.depth, config.filters, a);
    auto m2 = build_model<float>(config.depth, config.filters, b);
    EXPECT_EQ(train(m1, patches, config).loss_history, train(m2, patches, config).loss_history);
}

TEST(Train, ResumeThroughCheckpointMatchesUninterruptedRun) {
    const auto patches = toy_patches(12, 21, 4);
    auto config = toy_config();
    config.epochs = 4;
    config.decay_epoch = 2;
    Rng a(config.seed), b(config.seed);
    auto full = build_model<float>(config.depth, config.filters, a);
    const auto full_state = train(full, patches, config);

    auto part = build_model<float>(config.depth, config.filters, b);
    auto half = config;
    half.epochs = 2;
    const auto half_state = train(part, patches, half);
    std::stringstream buffer;
    write_checkpoint(buffer, Checkpoint{part, config, half_state});
    auto ck = read_checkpoint(buffer);
    const auto resumed = train(ck.model, patches, ck.config, ck.state);
    EXPECT_EQ(resumed.loss_history, full_state.loss_history);

    std::stringstream a1, a2;
    write_checkpoint(a1, Checkpoint{full, config, full_state});
    write_checkpoint(a2, Checkpoint{ck.model, config, resumed});
    EXPECT_EQ(a1.str(), a2.str());
}

TEST(Checkpoint, RoundTripAndCorruption) {
    Rng rng(6);
    auto model = build_model<float>(3, 2, rng);
    Checkpoint ck{model, toy_config(), {}};
    ck.state.loss_history = {0.5, 0.25};
    std::stringstream s;
    write_checkpoint(s, ck);
    const std::string bytes = s.str();
    std::stringstream in(bytes);
    const auto back = read_checkpoint(in);
    EXPECT_EQ(back.state.loss_history, ck.state.loss_history);
    EXPECT_EQ(format_config(back.config), format_config(ck.config));

    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(read_checkpoint(truncated), DataError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream bad_magic(bad);
    EXPECT_THROW(read_checkpoint(bad_magic), DataError);
}

TEST(Detector, ThresholdTieIsFlagged) {
    ProbabilityMap p(1, 3, std::vector<float>{0.7f, 0.5f, 0.2f});
    const auto m = threshold_map(p, 0.5);
    EXPECT_EQ(m.data(), (std::vector<std::uint8_t>{1, 1, 0}));
    EXPECT_THROW(threshold_map(p, 1.0), ContractError);
}

TEST(Detector, SwitchingFilterMatchesDirectRestoreOnItsOwnMap) {
    Rng rng(7);
    const auto model = build_model<float>(3, 2, rng);
    auto noisy = smooth_image(16, 16, 1);
    const auto result = switching_filter(noisy, model);
    if (count_flagged(result.map) < result.map.pixels()) {
        EXPECT_EQ(result.restored, adaptive_mean_restore(noisy, result.map));
    }
}
