#pragma once

#include "idcnn/image.hpp"
#include "idcnn/model.hpp"
#include "idcnn/restore.hpp"

namespace idcnn {

/// Runs the detector on the whole image in one pass (inference-mode batch
/// normalization). Requires h, w >= 3.
ProbabilityMap predict_probability(const IdcnnModel& model, const ColorImage& image);

/// A pixel is flagged iff probability >= threshold; threshold in (0, 1).
NoiseMap threshold_map(const ProbabilityMap& probability, double threshold = 0.5);
NoiseMap detect(const IdcnnModel& model, const ColorImage& image, double threshold = 0.5);

struct SwitchingResult {
    ColorImage restored;
    NoiseMap map;
    ProbabilityMap probability;
};

/// Detect, then restore only the flagged pixels.
SwitchingResult switching_filter(const ColorImage& noisy, const IdcnnModel& model, double threshold = 0.5,
                                 const RestoreConfig& config = {});

} // namespace idcnn
