#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "idcnn/random.hpp"
#include "idcnn/tensor.hpp"

namespace idcnn::nn {

/// A trainable buffer and its gradient. Both spans must have equal length.
template <typename T>
struct ParamSlot {
    std::span<T> value;
    std::span<const T> grad;
};

/// ADAM optimizer state. Moment buffers are created on the first step and
/// keep the slot order of that step.
template <typename T>
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
};

/// One bias-corrected ADAM update over all slots; increments state.t by 1.
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
template <typename T>
void adam_step(std::span<const ParamSlot<T>> slots, AdamState<T>& state);

/// Glorot/Xavier uniform limit sqrt(6 / (fan_in + fan_out)).
double glorot_limit(std::size_t fan_in, std::size_t fan_out);

/// Fills values with U[-b, b], b = glorot_limit(fan_in, fan_out), drawn in order from rng.
template <typename T>
void glorot_uniform_fill(std::span<T> values, std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Glorot-initialized conv kernel tensor of shape (k_out, c_in, 3, 3);
/// fan_in = c_in * 9, fan_out = k_out * 9.
template <typename T>
BasicTensor<T> glorot_uniform_init(std::size_t out_channels, std::size_t in_channels, Rng& rng);

} // namespace idcnn::nn
