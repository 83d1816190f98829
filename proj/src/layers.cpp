#include "idcnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "idcnn/parallel.hpp"

namespace idcnn::nn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

// Upper bound on im2col buffer elements; whole images are processed in
// row blocks so inference on large inputs stays bounded in memory.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

struct RowBlocks {
    std::size_t rows_per_block;
    std::size_t count;
};

RowBlocks row_blocks(std::size_t channels, std::size_t h, std::size_t w) {
    const std::size_t per_row = std::max<std::size_t>(1, channels * 9 * w);
    const std::size_t rows = std::clamp<std::size_t>(kColumnBudget / per_row, 1, h);
    return {rows, (h + rows - 1) / rows};
}

// Column matrix of shape (c*9, rows*w) for output rows [y0, y1) of one item.
template <typename T>
void im2col(const BasicTensor<T>& input, std::size_t n, std::size_t y0, std::size_t y1, RowMatrix<T>& col) {
    const auto& s = input.shape();
    const std::size_t rows = y1 - y0;
    col.resize(static_cast<Eigen::Index>(s.c * 9), static_cast<Eigen::Index>(rows * s.w));
    for (std::size_t c = 0; c < s.c; ++c) {
        const T* src = input.plane(n, c);
        for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
                T* dst = col.data() + ((c * 3 + ky) * 3 + kx) * rows * s.w;
                for (std::size_t y = y0; y < y1; ++y) {
                    T* out = dst + (y - y0) * s.w;
                    const auto sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.h)) {
                        std::fill(out, out + s.w, T{0});
                        continue;
                    }
                    const T* row = src + static_cast<std::size_t>(sy) * s.w;
                    // Column x reads row[x + kx - 1].
                    if (kx == 0) {
                        out[0] = T{0};
                        std::copy(row, row + s.w - 1, out + 1);
                    } else if (kx == 1) {
                        std::copy(row, row + s.w, out);
                    } else {
                        std::copy(row + 1, row + s.w, out);
                        out[s.w - 1] = T{0};
                    }
                }
            }
        }
    }
}

// Scatter-add of a column-gradient matrix back onto the input gradient.
template <typename T>
void col2im_add(const RowMatrix<T>& col, std::size_t n, std::size_t y0, std::size_t y1, BasicTensor<T>& grad) {
    const auto& s = grad.shape();
    const std::size_t rows = y1 - y0;
    for (std::size_t c = 0; c < s.c; ++c) {
        T* dst = grad.plane(n, c);
        for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
                const T* src = col.data() + ((c * 3 + ky) * 3 + kx) * rows * s.w;
                for (std::size_t y = y0; y < y1; ++y) {
                    const auto sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.h)) continue;
                    T* row = dst + static_cast<std::size_t>(sy) * s.w;
                    const T* in = src + (y - y0) * s.w;
                    if (kx == 0) {
                        for (std::size_t x = 1; x < s.w; ++x) row[x - 1] += in[x];
                    } else if (kx == 1) {
                        for (std::size_t x = 0; x < s.w; ++x) row[x] += in[x];
                    } else {
                        for (std::size_t x = 0; x + 1 < s.w; ++x) row[x + 1] += in[x];
                    }
                }
            }
        }
    }
}

// Number of partial-sum buffers used for cross-item reductions. One per
// item in deterministic mode (order fixed regardless of threads), otherwise
// one per worker.
std::size_t reduction_slots(std::size_t items) {
    const auto policy = execution_policy();
    if (policy.deterministic) return items;
    return std::min<std::size_t>(items, policy.threads);
}

template <typename T>
void check_channels(const BasicTensor<T>& input, std::size_t expected, const char* op) {
    require(input.shape().c == expected, std::string(op) + ": input has " + std::to_string(input.shape().c) +
                                             " channels, parameters expect " + std::to_string(expected));
}

} // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvParams<T>& params) {
    check_channels(input, params.in_channels, "conv2d");
    require(params.weights.size() == params.out_channels * params.in_channels * 9 &&
                params.bias.size() == params.out_channels,
            "conv2d: parameter buffers do not match declared channel counts");
    const auto& s = input.shape();
    const std::size_t k = params.out_channels;
    BasicTensor<T> out(Shape{s.n, k, s.h, s.w});
    if (s.size() == 0) return out;

    const auto blocks = row_blocks(s.c, s.h, s.w);
    const Eigen::Map<const RowMatrix<T>> weights(params.weights.data(), static_cast<Eigen::Index>(k),
                                                 static_cast<Eigen::Index>(s.c * 9));
    parallel_for(s.n, [&](std::size_t n) {
        RowMatrix<T> col;
        for (std::size_t b = 0; b < blocks.count; ++b) {
            const std::size_t y0 = b * blocks.rows_per_block;
            const std::size_t y1 = std::min(s.h, y0 + blocks.rows_per_block);
            im2col(input, n, y0, y1, col);
            StridedMap<T> block(out.plane(n, 0) + y0 * s.w, static_cast<Eigen::Index>(k),
                                static_cast<Eigen::Index>((y1 - y0) * s.w),
                                Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
            block.noalias() = weights * col;
            for (std::size_t o = 0; o < k; ++o) block.row(static_cast<Eigen::Index>(o)).array() += params.bias[o];
        }
    });
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvParams<T>& params,
                             const BasicTensor<T>& grad_out) {
    check_channels(input, params.in_channels, "conv2d_backward");
    const auto& s = input.shape();
    const std::size_t k = params.out_channels;
    const std::size_t c9 = s.c * 9;
    require(grad_out.shape() == (Shape{s.n, k, s.h, s.w}),
            "conv2d_backward: grad_out shape " + to_string(grad_out.shape()) + " does not match output shape");

    ConvGrads<T> grads{BasicTensor<T>(s), std::vector<T>(k * c9, T{0}), std::vector<T>(k, T{0})};
    if (s.size() == 0) return grads;

    const auto blocks = row_blocks(s.c, s.h, s.w);
    const Eigen::Map<const RowMatrix<T>> weights(params.weights.data(), static_cast<Eigen::Index>(k),
                                                 static_cast<Eigen::Index>(c9));
    const std::size_t slots = reduction_slots(s.n);
    std::vector<RowMatrix<T>> weight_parts(slots, RowMatrix<T>::Zero(static_cast<Eigen::Index>(k),
                                                                     static_cast<Eigen::Index>(c9)));
    std::vector<std::vector<T>> bias_parts(slots, std::vector<T>(k, T{0}));

    const auto item_work = [&](std::size_t n, std::size_t slot) {
        RowMatrix<T> col;
        RowMatrix<T> col_grad;
        for (std::size_t b = 0; b < blocks.count; ++b) {
            const std::size_t y0 = b * blocks.rows_per_block;
            const std::size_t y1 = std::min(s.h, y0 + blocks.rows_per_block);
            im2col(input, n, y0, y1, col);
            ConstStridedMap<T> g(grad_out.plane(n, 0) + y0 * s.w, static_cast<Eigen::Index>(k),
                                 static_cast<Eigen::Index>((y1 - y0) * s.w),
                                 Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
            weight_parts[slot].noalias() += g * col.transpose();
            // Plain loop: Eigen's vectorized sum peels by address alignment,
            // which would make the result depend on where the buffer lives.
            for (std::size_t o = 0; o < k; ++o) {
                const T* row = grad_out.plane(n, o) + y0 * s.w;
                T acc = T{0};
                for (std::size_t i = 0; i < (y1 - y0) * s.w; ++i) acc += row[i];
                bias_parts[slot][o] += acc;
            }
            col_grad.noalias() = weights.transpose() * g;
            col2im_add(col_grad, n, y0, y1, grads.input);
        }
    };
    if (slots == s.n) {
        parallel_for(s.n, [&](std::size_t n) { item_work(n, n); });
    } else {
        parallel_for(slots, [&](std::size_t slot) {
            for (std::size_t n = s.n * slot / slots; n < s.n * (slot + 1) / slots; ++n) item_work(n, slot);
        });
    }

    Eigen::Map<RowMatrix<T>> weight_grad(grads.weights.data(), static_cast<Eigen::Index>(k),
                                         static_cast<Eigen::Index>(c9));
    for (std::size_t slot = 0; slot < slots; ++slot) {
        weight_grad += weight_parts[slot];
        for (std::size_t o = 0; o < k; ++o) grads.bias[o] += bias_parts[slot][o];
    }
    return grads;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
    BasicTensor<T> out(input.shape());
    const auto in = input.values();
    auto o = out.values();
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] > T{0} ? in[i] : T{0};
    return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out) {
    require(input.shape() == grad_out.shape(), "relu_backward: shape mismatch");
    BasicTensor<T> grad(input.shape());
    const auto in = input.values();
    const auto g = grad_out.values();
    auto o = grad.values();
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] > T{0} ? g[i] : T{0};
    return grad;
}

template <typename T>
BasicTensor<T> batchnorm(const BasicTensor<T>& input, BatchNormParams<T>& params, Mode mode,
                         BatchNormCache<T>* cache) {
    check_channels(input, params.channels, "batchnorm");
    if (mode == Mode::infer) return batchnorm_infer(input, params);

    const auto& s = input.shape();
    const std::size_t count = s.n * s.plane();
    require(count >= 2, "batchnorm: train mode needs at least two values per channel (variance undefined)");
    require(params.eps > T{0}, "batchnorm: eps must be positive");

    BasicTensor<T> out(s);
    BatchNormCache<T> local;
    BatchNormCache<T>& saved = cache ? *cache : local;
    saved.normalized = BasicTensor<T>(s);
    saved.inv_std.assign(s.c, T{0});

    parallel_for(s.c, [&](std::size_t c) {
        double sum = 0.0;
        for (std::size_t n = 0; n < s.n; ++n) {
            const T* p = input.plane(n, c);
            for (std::size_t i = 0; i < s.plane(); ++i) sum += p[i];
        }
        const double mean = sum / static_cast<double>(count);
        double squares = 0.0;
        for (std::size_t n = 0; n < s.n; ++n) {
            const T* p = input.plane(n, c);
            for (std::size_t i = 0; i < s.plane(); ++i) {
                const double d = p[i] - mean;
                squares += d * d;
            }
        }
        const double var = squares / static_cast<double>(count);
        const double inv_std = 1.0 / std::sqrt(var + static_cast<double>(params.eps));
        saved.inv_std[c] = static_cast<T>(inv_std);
        const double gamma = params.gamma[c];
        const double beta = params.beta[c];
        for (std::size_t n = 0; n < s.n; ++n) {
            const T* p = input.plane(n, c);
            T* xhat = saved.normalized.plane(n, c);
            T* o = out.plane(n, c);
            for (std::size_t i = 0; i < s.plane(); ++i) {
                const double normalized = (p[i] - mean) * inv_std;
                xhat[i] = static_cast<T>(normalized);
                o[i] = static_cast<T>(gamma * normalized + beta);
            }
        }
        const double m = params.momentum;
        params.running_mean[c] = static_cast<T>(m * params.running_mean[c] + (1.0 - m) * mean);
        params.running_var[c] = static_cast<T>(m * params.running_var[c] + (1.0 - m) * var);
    });
    return out;
}

template <typename T>
BasicTensor<T> batchnorm_infer(const BasicTensor<T>& input, const BatchNormParams<T>& params) {
    check_channels(input, params.channels, "batchnorm");
    const auto& s = input.shape();
    BasicTensor<T> out(s);
    for (std::size_t c = 0; c < s.c; ++c) {
        const T scale = params.gamma[c] / std::sqrt(std::max(params.running_var[c], T{0}) + params.eps);
        const T shift = params.beta[c] - scale * params.running_mean[c];
        for (std::size_t n = 0; n < s.n; ++n) {
            const T* p = input.plane(n, c);
            T* o = out.plane(n, c);
            for (std::size_t i = 0; i < s.plane(); ++i) o[i] = scale * p[i] + shift;
        }
    }
    return out;
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(const BatchNormCache<T>& cache, const BatchNormParams<T>& params,
                                     const BasicTensor<T>& grad_out) {
    const auto& s = cache.normalized.shape();
    require(grad_out.shape() == s, "batchnorm_backward: grad_out shape does not match forward input");
    require(s.c == params.channels, "batchnorm_backward: channel mismatch");
    const std::size_t count = s.n * s.plane();

    BatchNormGrads<T> grads{BasicTensor<T>(s), std::vector<T>(s.c, T{0}), std::vector<T>(s.c, T{0})};
    // dx = gamma * inv_std / N * (N * dy - sum(dy) - xhat * sum(dy * xhat))
    parallel_for(s.c, [&](std::size_t c) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (std::size_t n = 0; n < s.n; ++n) {
            const T* g = grad_out.plane(n, c);
            const T* xhat = cache.normalized.plane(n, c);
            for (std::size_t i = 0; i < s.plane(); ++i) {
                sum_dy += g[i];
                sum_dy_xhat += static_cast<double>(g[i]) * xhat[i];
            }
        }
        grads.beta[c] = static_cast<T>(sum_dy);
        grads.gamma[c] = static_cast<T>(sum_dy_xhat);
        const double n_total = static_cast<double>(count);
        const double scale = static_cast<double>(params.gamma[c]) * cache.inv_std[c] / n_total;
        for (std::size_t n = 0; n < s.n; ++n) {
            const T* g = grad_out.plane(n, c);
            const T* xhat = cache.normalized.plane(n, c);
            T* dx = grads.input.plane(n, c);
            for (std::size_t i = 0; i < s.plane(); ++i) {
                dx[i] = static_cast<T>(scale * (n_total * g[i] - sum_dy - xhat[i] * sum_dy_xhat));
            }
        }
    });
    return grads;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input) {
    constexpr T lo = std::numeric_limits<T>::epsilon() / 2;
    constexpr T hi = T{1} - std::numeric_limits<T>::epsilon() / 2;
    BasicTensor<T> out(input.shape());
    const auto in = input.values();
    auto o = out.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        const T x = in[i];
        T y;
        if (x >= T{0}) {
            y = T{1} / (T{1} + std::exp(-x));
        } else {
            const T e = std::exp(x);
            y = e / (T{1} + e);
        }
        o[i] = std::clamp(y, lo, hi);
    }
    return out;
}

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_out) {
    require(output.shape() == grad_out.shape(), "sigmoid_backward: shape mismatch");
    BasicTensor<T> grad(output.shape());
    const auto y = output.values();
    const auto g = grad_out.values();
    auto o = grad.values();
    for (std::size_t i = 0; i < y.size(); ++i) o[i] = g[i] * y[i] * (T{1} - y[i]);
    return grad;
}

template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
    require(pred.shape() == target.shape(), "mse_loss: prediction shape " + to_string(pred.shape()) +
                                                " does not match target " + to_string(target.shape()));
    const auto& s = pred.shape();
    LossResult<T> result{0.0, BasicTensor<T>(s)};
    if (s.n == 0) return result;
    const std::size_t per_item = s.c * s.plane();
    if (per_item == 0) return result;
    const double scale = 1.0 / (static_cast<double>(s.n) * static_cast<double>(per_item));
    const auto p = pred.values();
    const auto t = target.values();
    auto g = result.grad.values();
    double total = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
        double item = 0.0;
        for (std::size_t i = n * per_item; i < (n + 1) * per_item; ++i) {
            const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
            item += d * d;
            g[i] = static_cast<T>(2.0 * d * scale);
        }
        total += item / static_cast<double>(per_item);
    }
    result.loss = total / static_cast<double>(s.n);
    return result;
}

#define IDCNN_INSTANTIATE_LAYERS(T)                                                                          \
    template BasicTensor<T> conv2d(const BasicTensor<T>&, const ConvParams<T>&);                             \
    template ConvGrads<T> conv2d_backward(const BasicTensor<T>&, const ConvParams<T>&, const BasicTensor<T>&); \
    template BasicTensor<T> relu(const BasicTensor<T>&);                                                     \
    template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                     \
    template BasicTensor<T> batchnorm(const BasicTensor<T>&, BatchNormParams<T>&, Mode, BatchNormCache<T>*);  \
    template BasicTensor<T> batchnorm_infer(const BasicTensor<T>&, const BatchNormParams<T>&);               \
    template BatchNormGrads<T> batchnorm_backward(const BatchNormCache<T>&, const BatchNormParams<T>&,       \
                                                  const BasicTensor<T>&);                                    \
    template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                                  \
    template BasicTensor<T> sigmoid_backward(const BasicTensor<T>&, const BasicTensor<T>&);                  \
    template LossResult<T> mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);

IDCNN_INSTANTIATE_LAYERS(float)
IDCNN_INSTANTIATE_LAYERS(double)

#undef IDCNN_INSTANTIATE_LAYERS

} // namespace idcnn::nn
