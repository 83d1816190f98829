#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "idcnn/sequential.hpp"

namespace idcnn::nn {

struct GradCheckOptions {
    double eps = 1e-5;
    /// Lower bound of the relative-error denominator, so coordinates whose
    /// true gradient is ~0 are judged on absolute error instead.
    double denominator_floor = 1e-4;
    std::uint64_t seed = 0;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t coordinates = 0;
    /// Coordinates skipped because a finite-difference probe moved some
    /// ReLU input across zero (the loss is not differentiable there).
    std::size_t skipped_kinks = 0;
    std::string worst_coordinate;
};

/// Compares analytic gradients of L = sum(r * net(x)), r a fixed random
/// projection drawn from options.seed, against central differences
/// (L(x + eps) - L(x - eps)) / (2 eps) on every parameter and input
/// coordinate. The network runs in train mode (batch statistics).
/// Relative error: |a - n| / max(|a|, |n|, denominator_floor).
GradCheckReport grad_check(Sequential<double>& net, const Tensor64& input, const GradCheckOptions& options = {});

} // namespace idcnn::nn
