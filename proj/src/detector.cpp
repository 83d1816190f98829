#include "idcnn/detector.hpp"

namespace idcnn {

ProbabilityMap predict_probability(const IdcnnModel& model, const ColorImage& image) {
    require(image.height() >= 3 && image.width() >= 3, "detector: image must be at least 3x3");
    const auto out = model.net.forward(to_tensor<float>(image));
    require(out.shape() == nn::Shape{1, 1, image.height(), image.width()}, "detector: model output has the wrong shape");
    const auto values = out.values();
    return ProbabilityMap(image.height(), image.width(), std::vector<float>(values.begin(), values.end()));
}

NoiseMap threshold_map(const ProbabilityMap& probability, double threshold) {
    require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0, 1)");
    NoiseMap map(probability.height(), probability.width(), 0);
    const auto& in = probability.data();
    auto& out = map.data();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<double>(in[i]) >= threshold ? 1 : 0;
    return map;
}

NoiseMap detect(const IdcnnModel& model, const ColorImage& image, double threshold) {
    return threshold_map(predict_probability(model, image), threshold);
}

SwitchingResult switching_filter(const ColorImage& noisy, const IdcnnModel& model, double threshold,
                                 const RestoreConfig& config) {
    SwitchingResult result;
    result.probability = predict_probability(model, noisy);
    result.map = threshold_map(result.probability, threshold);
    result.restored = adaptive_mean_restore(noisy, result.map, config);
    return result;
}

} // namespace idcnn
