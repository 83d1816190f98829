#include "idcnn/noise.hpp"

namespace idcnn {
namespace {

template <typename Draw>
CorruptedImage corrupt_with(const ColorImage& image, double rho, Rng& rng, Draw draw) {
    require(rho >= 0.0 && rho <= 1.0, "noise density rho must lie in [0, 1], got " + std::to_string(rho));
    CorruptedImage out{image, NoiseMap(image.height(), image.width(), 0)};
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            if (!rng.bernoulli(rho)) continue;
            out.map.at(y, x) = 1;
            for (std::size_t c = 0; c < 3; ++c) out.noisy.at(y, x, c) = draw(rng);
        }
    }
    return out;
}

} // namespace

std::string to_string(NoiseModel model) { return model == NoiseModel::ctri ? "ctri" : "spin"; }

NoiseModel parse_noise_model(const std::string& name) {
    if (name == "ctri") return NoiseModel::ctri;
    if (name == "spin") return NoiseModel::spin;
    throw ContractError("unknown noise model '" + name + "' (expected ctri or spin)");
}

CorruptedImage corrupt_ctri(const ColorImage& image, double rho, Rng& rng) {
    return corrupt_with(image, rho, rng, [](Rng& r) { return r.byte(); });
}

CorruptedImage corrupt_spin(const ColorImage& image, double rho, Rng& rng) {
    return corrupt_with(image, rho, rng, [](Rng& r) { return static_cast<std::uint8_t>(r.coin() ? 255 : 0); });
}

CorruptedImage corrupt(const ColorImage& image, NoiseModel model, double rho, Rng& rng) {
    return model == NoiseModel::ctri ? corrupt_ctri(image, rho, rng) : corrupt_spin(image, rho, rng);
}

CorruptedImage corrupt(const ColorImage& image, const NoiseSpec& spec) {
    Rng rng(spec.seed);
    return corrupt(image, spec.model, spec.rho, rng);
}

} // namespace idcnn
