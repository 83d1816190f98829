#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "idcnn/dataset.hpp"
#include "idcnn/netpbm.hpp"

using namespace idcnn;

namespace {

ColorImage random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    ColorImage img(h, w);
    for (auto& v : img.data()) v = rng.byte();
    return img;
}

} // namespace

TEST(Netpbm, PpmRoundTripAndHeader) {
    ColorImage img(1, 2);
    img.data() = {1, 2, 3, 4, 5, 6};
    std::stringstream s;
    write_ppm(s, img);
    EXPECT_EQ(s.str(), std::string("P6 2 1 255\n") + std::string("\x01\x02\x03\x04\x05\x06", 6));
    EXPECT_EQ(s.str().size(), 17u);
    EXPECT_EQ(read_ppm(s), img);
    const auto big = random_image(17, 23, 1);
    std::stringstream t;
    write_ppm(t, big);
    EXPECT_EQ(read_ppm(t), big);
}

TEST(Netpbm, TruncatedAndMalformedRejected) {
    std::stringstream full;
    write_ppm(full, random_image(4, 4, 2));
    std::stringstream truncated(full.str().substr(0, full.str().size() - 1));
    EXPECT_THROW(read_ppm(truncated), DataError);
    std::stringstream wrong_magic("P3 1 1 255\n1 2 3");
    EXPECT_THROW(read_ppm(wrong_magic), DataError);
    std::stringstream wide("P6 1 1 65535\n123456");
    EXPECT_THROW(read_ppm(wide), DataError);
}

TEST(Netpbm, CommentsInHeader) {
    std::stringstream s(std::string("P6\n# made by hand\n1 1\n255\n") + std::string("\x07\x08\x09", 3));
    const auto img = read_ppm(s);
    EXPECT_EQ(img.at(0, 0, 2), 9);
}

TEST(Netpbm, MapsAndProbabilities) {
    NoiseMap map(3, 2, 0);
    map.at(1, 1) = 1;
    std::stringstream s;
    write_map_pgm(s, map);
    EXPECT_EQ(read_map_pgm(s), map);
    ProbabilityMap p(1, 3, std::vector<float>{0.0f, 0.5f, 1.0f});
    std::stringstream t;
    write_probability_pgm(t, p);
    const auto bytes = t.str();
    EXPECT_EQ(bytes.substr(0, 13), "P5 3 1 65535\n");
    EXPECT_EQ(bytes.size(), 13u + 6u);
    EXPECT_EQ(bytes[13], '\0');
    const auto back = read_probability_pgm(t);
    EXPECT_NEAR(back.at(0, 1), 32768.0f / 65535.0f, 1e-7);
    EXPECT_EQ(back.at(0, 2), 1.0f);
}

TEST(Resize, IdentityConstantAndDims) {
    const auto img = random_image(321, 481, 3);
    EXPECT_EQ(bicubic_resize(img, 1.0), img);
    const std::pair<std::size_t, std::size_t> dims[] = {{289, 433}, {257, 385}, {225, 337}};
    const double scales[] = {0.9, 0.8, 0.7};
    for (int i = 0; i < 3; ++i) {
        const auto r = bicubic_resize(img, scales[i]);
        EXPECT_EQ(r.height(), dims[i].first);
        EXPECT_EQ(r.width(), dims[i].second);
    }
    const ColorImage flat(40, 30, 91);
    const auto r = bicubic_resize(flat, 0.77);
    for (auto v : r.data()) EXPECT_EQ(v, 91);
}

TEST(Augment, GroupIdentities) {
    const auto img = random_image(5, 8, 4);
    EXPECT_EQ(rotate(img, 4), img);
    EXPECT_EQ(flip_up_down(flip_up_down(img)), img);
    const auto variants = augment(img);
    ASSERT_EQ(variants.size(), 4u);
    EXPECT_EQ(variants[0].height(), 8u);
    EXPECT_EQ(variants[0].width(), 5u);
    EXPECT_EQ(variants[1].height(), 5u);
    EXPECT_EQ(variants[2].height(), 8u);
    EXPECT_EQ(variants[1], rotate(img, 2));
    // counter-clockwise: top-right corner moves to the top-left
    EXPECT_EQ(variants[0].at(0, 0, 0), img.at(0, 7, 0));
}

TEST(Patches, GridCounts) {
    const auto img = random_image(321, 481, 5);
    const NoiseMap map(321, 481, 0);
    EXPECT_EQ(extract_patches(img, map, 41).patches.size(), 77u);
    const auto one = random_image(41, 41, 6);
    EXPECT_EQ(extract_patches(one, NoiseMap(41, 41, 0), 41).patches.size(), 1u);
    EXPECT_THROW(extract_patches(one, NoiseMap(41, 41, 0), 42), ContractError);
}

TEST(Patches, FourScalePipelineGives241) {
    std::size_t count = 0;
    TrainingSetOptions options;
    add_training_image(random_image(321, 481, 7), 0, options, [&](Patch&&) { ++count; });
    EXPECT_EQ(count, 241u);
}

TEST(Patches, SmallCleanImage) {
    TrainingSetOptions options;
    options.scales = {1.0};
    options.noise.rho = 0.0;
    std::vector<Patch> out;
    const auto img = random_image(82, 82, 8);
    add_training_image(img, 0, options, [&](Patch&& p) { out.push_back(std::move(p)); });
    ASSERT_EQ(out.size(), 4u);
    for (const auto& p : out) EXPECT_EQ(count_flagged(p.map), 0u);
    EXPECT_EQ(out[3].noisy, crop(img, 41, 41, 41, 41));
}

TEST(Patches, AugmentationQuintuplesAndSeedsAreStable) {
    TrainingSetOptions options;
    options.scales = {1.0};
    options.augment = true;
    options.seed = 3;
    std::vector<Patch> a, b;
    const auto img = random_image(82, 123, 9);
    add_training_image(img, 2, options, [&](Patch&& p) { a.push_back(std::move(p)); });
    add_training_image(img, 2, options, [&](Patch&& p) { b.push_back(std::move(p)); });
    EXPECT_EQ(a.size(), 6u * 5u);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].noisy, b[i].noisy);
        EXPECT_EQ(a[i].map, b[i].map);
    }
}

TEST(Patches, RandomDensityPerPatch) {
    TrainingSetOptions options;
    options.scales = {1.0};
    options.noise.random = true;
    std::vector<double> rhos;
    add_training_image(random_image(123, 123, 10), 0, options, [&](Patch&& p) {
        EXPECT_GE(p.origin.rho, 0.1);
        EXPECT_LE(p.origin.rho, 0.5);
        rhos.push_back(p.origin.rho);
    });
    ASSERT_EQ(rhos.size(), 9u);
    EXPECT_NE(rhos[0], rhos[1]);
}

TEST(PatchCache, RoundTripAndTruncation) {
    TrainingSetOptions options;
    options.scales = {1.0};
    PatchSet set{41, {}};
    add_training_image(random_image(82, 82, 11), 0, options, [&](Patch&& p) { set.patches.push_back(std::move(p)); });
    std::stringstream s;
    write_patch_cache(s, set);
    const std::string bytes = s.str();
    std::stringstream in(bytes);
    const auto back = read_patch_cache(in);
    ASSERT_EQ(back.patches.size(), 4u);
    EXPECT_EQ(back.patches[2].noisy, set.patches[2].noisy);
    EXPECT_EQ(back.patches[2].map, set.patches[2].map);
    std::stringstream cut(bytes.substr(0, bytes.size() - 10));
    EXPECT_THROW(read_patch_cache(cut), DataError);
}

TEST(Dataset, DirectoryListing) {
    const auto dir = std::filesystem::temp_directory_path() / "idcnn_dataset_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    EXPECT_THROW(list_images(dir), DataError);
    save_ppm(random_image(41, 41, 12), dir / "b.ppm");
    save_ppm(random_image(41, 41, 13), dir / "a.ppm");
    const auto files = list_images(dir);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(files[0].filename(), "a.ppm");
    TrainingSetOptions options;
    options.scales = {1.0};
    EXPECT_EQ(build_training_set(dir, options).patches.size(), 2u);
    std::filesystem::remove_all(dir);
}
