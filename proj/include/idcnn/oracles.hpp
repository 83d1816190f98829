#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idcnn/layers.hpp"
#include "idcnn/metrics.hpp"
#include "idcnn/sequential.hpp"

// Slow direct-formula references, kept apart from the production code paths
// they check. Used by the verify command and the test suites.
namespace idcnn::oracle {

nn::Tensor64 conv2d_loop(const nn::Tensor64& input, const nn::ConvParams<double>& params);
double mse_loss_loop(const nn::Tensor64& pred, const nn::Tensor64& target);

ConfusionCounts confusion_loop(const NoiseMap& truth, const NoiseMap& estimate);
double psnr_loop(const ColorImage& a, const ColorImage& b);
double mae_loop(const ColorImage& a, const ColorImage& b);
/// Two-pass SSIM with a full 2-D Gaussian window at every valid position.
double ssim_direct(const ColorImage& a, const ColorImage& b);

/// Grows 3, 5, 7, ... windows around each flagged pixel until one holds an
/// originally clean pixel, then averages those (round half away from zero).
ColorImage restore_brute(const ColorImage& noisy, const NoiseMap& map);

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct SelfCheckOptions {
    nn::BackwardFault fault = nn::BackwardFault::none;
    std::uint64_t seed = 1;
    std::size_t oracle_instances = 200;
    std::size_t restore_instances = 500;
};

struct SelfCheckReport {
    std::vector<CheckResult> checks;
    bool passed() const;
};

/// Gradient checks per layer type and on a depth-5 model, metric loop
/// oracles and the brute-force restoration oracle.
SelfCheckReport run_self_check(const SelfCheckOptions& options = {});

SelfCheckReport gradient_checks(const SelfCheckOptions& options);
SelfCheckReport metric_checks(const SelfCheckOptions& options);
SelfCheckReport restore_checks(const SelfCheckOptions& options);

} // namespace idcnn::oracle
