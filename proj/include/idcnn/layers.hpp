#pragma once

#include <cstddef>
#include <vector>

#include "idcnn/tensor.hpp"

namespace idcnn::nn {

enum class Mode { train, infer };

/// 3x3 convolution kernel bank, weights laid out (k_out, c_in, 3, 3).
template <typename T>
struct ConvParams {
    static constexpr std::size_t kernel = 3;
    static constexpr std::size_t taps = kernel * kernel;

    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::vector<T> weights;
    std::vector<T> bias;

    ConvParams() = default;
    ConvParams(std::size_t out, std::size_t in)
        : out_channels(out), in_channels(in), weights(out * in * taps, T{0}), bias(out, T{0}) {}

    std::size_t weight_index(std::size_t o, std::size_t c, std::size_t ky, std::size_t kx) const {
        return ((o * in_channels + c) * kernel + ky) * kernel + kx;
    }
};

template <typename T>
struct ConvGrads {
    BasicTensor<T> input;
    std::vector<T> weights;
    std::vector<T> bias;
};

/// Same-size cross-correlation: zero padding 1, stride 1, no kernel flip.
///   out[n,o,y,x] = bias[o] + sum_{c,ky,kx} w[o,c,ky,kx] * in[n,c,y+ky-1,x+kx-1]
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvParams<T>& params);

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvParams<T>& params,
                             const BasicTensor<T>& grad_out);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

/// Passes grad where input > 0; the derivative at exactly 0 is taken as 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out);

template <typename T>
struct BatchNormParams {
    std::size_t channels = 0;
    std::vector<T> gamma;
    std::vector<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;
    T eps = T(1e-4);
    T momentum = T(0.9);

    BatchNormParams() = default;
    explicit BatchNormParams(std::size_t c)
        : channels(c), gamma(c, T{1}), beta(c, T{0}), running_mean(c, T{0}), running_var(c, T{1}) {}
};

/// Values saved by a train-mode forward pass for the backward pass.
template <typename T>
struct BatchNormCache {
    BasicTensor<T> normalized;
    std::vector<T> inv_std;
};

template <typename T>
struct BatchNormGrads {
    BasicTensor<T> input;
    std::vector<T> gamma;
    std::vector<T> beta;
};

/// Per-channel normalization over (n, h, w).
///
/// Train mode uses biased batch statistics and folds them into the running
/// statistics as running = momentum * running + (1 - momentum) * batch.
/// Infer mode reads the running statistics and leaves params untouched.
template <typename T>
BasicTensor<T> batchnorm(const BasicTensor<T>& input, BatchNormParams<T>& params, Mode mode,
                         BatchNormCache<T>* cache = nullptr);

template <typename T>
BasicTensor<T> batchnorm_infer(const BasicTensor<T>& input, const BatchNormParams<T>& params);

template <typename T>
BatchNormGrads<T> batchnorm_backward(const BatchNormCache<T>& cache, const BatchNormParams<T>& params,
                                     const BasicTensor<T>& grad_out);

/// Logistic function. Outputs are clamped to the open interval so that
/// saturated values never round to exactly 0 or 1.
template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input);

/// Backward from the forward output: grad * y * (1 - y).
template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out);

template <typename T>
struct LossResult {
    double loss = 0.0;
    BasicTensor<T> grad;
};

/// Mean over batch items of the per-item mean squared difference.
template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

} // namespace idcnn::nn
