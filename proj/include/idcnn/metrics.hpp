#pragma once

#include <cstddef>
#include <cstdint>

#include "idcnn/image.hpp"

namespace idcnn {

/// Impulse-detection confusion tallies; "positive" means noisy.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const NoiseMap& truth, const NoiseMap& estimate);

/// rho * TP / (TP + FN) + (1 - rho) * TN / (TN + FP), rho = (TP + FN) / Q
/// from the ground truth. An empty class contributes a rate of 0 and has
/// weight 0, so only the surviving term remains.
double wacc(const ConfusionCounts& c);
/// FP / (FP + TN); 0 when the truth has no clean pixel.
double fpr(const ConfusionCounts& c);
/// FN / (TP + FN); 0 when the truth has no impulse.
double fnr(const ConfusionCounts& c);

/// (1 / 3Q) * sum of squared channel differences.
double mse(const ColorImage& reference, const ColorImage& restored);
/// 10 log10(255^2 / MSE); +infinity for identical images.
double psnr(const ColorImage& reference, const ColorImage& restored);
/// (1 / 3Q) * sum of absolute channel differences.
double mae(const ColorImage& reference, const ColorImage& restored);

/// Mean SSIM per channel (11x11 Gaussian window, sigma 1.5, K1 = 0.01,
/// K2 = 0.03, L = 255, windows fully inside the image), averaged over the
/// three channels. Requires both sides >= 11.
double ssim_c(const ColorImage& a, const ColorImage& b);

struct QualityReport {
    double psnr = 0.0;
    double mae = 0.0;
    double ssim = 0.0;
};

QualityReport quality(const ColorImage& reference, const ColorImage& restored);

/// MAE split by detection outcome: each class's absolute-error sum over 3Q.
/// The four parts always sum to mae(clean, restored); mae_tn is 0 whenever
/// the restoration leaves true negatives untouched.
struct AimDiagram {
    double mae_tp = 0.0;
    double mae_fp = 0.0;
    double mae_fn = 0.0;
    double mae_tn = 0.0;
};

AimDiagram aim_diagram(const ColorImage& clean, const ColorImage& restored, const NoiseMap& truth,
                       const NoiseMap& estimate);

} // namespace idcnn
