#include "idcnn/sequential.hpp"

#include <istream>
#include <ostream>
#include <type_traits>

#include "binary_io.hpp"

namespace idcnn::nn {
namespace {

enum LayerTag : std::uint32_t { kConvTag = 1, kBatchNormTag = 2, kReluTag = 3, kSigmoidTag = 4 };

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <typename U, typename T>
std::vector<U> convert(const std::vector<T>& values) {
    return std::vector<U>(values.begin(), values.end());
}

} // namespace

std::string to_string(BackwardFault fault) {
    switch (fault) {
    case BackwardFault::none: return "none";
    case BackwardFault::conv_weight_grad_doubled: return "conv-weight-grad-doubled";
    case BackwardFault::relu_gate_inverted: return "relu-gate-inverted";
    case BackwardFault::batchnorm_mean_term_dropped: return "batchnorm-mean-term-dropped";
    }
    return "unknown";
}

BackwardFault parse_backward_fault(const std::string& name) {
    for (const auto fault : {BackwardFault::none, BackwardFault::conv_weight_grad_doubled,
                             BackwardFault::relu_gate_inverted, BackwardFault::batchnorm_mean_term_dropped}) {
        if (to_string(fault) == name) return fault;
    }
    throw ContractError("unknown backward fault '" + name + "'");
}

template <typename T>
void Sequential<T>::add(Layer<T> layer) {
    layers_.push_back(std::move(layer));
}

template <typename T>
BasicTensor<T> Sequential<T>::forward(const BasicTensor<T>& input, Mode mode) {
    if (mode == Mode::infer) {
        trace_.clear();
        return std::as_const(*this).forward(input);
    }
    trace_.clear();
    trace_.reserve(layers_.size() + 1);
    trace_.push_back(input);
    for (auto& layer : layers_) {
        const auto& x = trace_.back();
        BasicTensor<T> y = std::visit(Overloaded{
                                          [&](ConvLayer<T>& l) { return conv2d(x, l.params); },
                                          [&](BatchNormLayer<T>& l) {
                                              return batchnorm(x, l.params, Mode::train, &l.cache);
                                          },
                                          [&](ReluLayer&) { return relu(x); },
                                          [&](SigmoidLayer&) { return sigmoid(x); },
                                      },
                                      layer);
        trace_.push_back(std::move(y));
    }
    return trace_.back();
}

template <typename T>
BasicTensor<T> Sequential<T>::forward(const BasicTensor<T>& input) const {
    BasicTensor<T> x = input;
    for (const auto& layer : layers_) {
        x = std::visit(Overloaded{
                           [&](const ConvLayer<T>& l) { return conv2d(x, l.params); },
                           [&](const BatchNormLayer<T>& l) { return batchnorm_infer(x, l.params); },
                           [&](const ReluLayer&) { return relu(x); },
                           [&](const SigmoidLayer&) { return sigmoid(x); },
                       },
                       layer);
    }
    return x;
}

template <typename T>
BasicTensor<T> Sequential<T>::backward(const BasicTensor<T>& grad_out) {
    require(trace_.size() == layers_.size() + 1, "Sequential::backward called without a train-mode forward pass");
    require(grad_out.shape() == trace_.back().shape(), "Sequential::backward: grad_out shape mismatch");
    BasicTensor<T> grad = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const auto& input = trace_[i];
        const auto& output = trace_[i + 1];
        grad = std::visit(
            Overloaded{
                [&](ConvLayer<T>& l) {
                    auto g = conv2d_backward(input, l.params, grad);
                    l.grad_weights.assign(g.weights.begin(), g.weights.end());
                    l.grad_bias.assign(g.bias.begin(), g.bias.end());
                    if (fault_ == BackwardFault::conv_weight_grad_doubled) {
                        for (auto& v : l.grad_weights) v *= T{2};
                    }
                    return std::move(g.input);
                },
                [&](BatchNormLayer<T>& l) {
                    auto g = batchnorm_backward(l.cache, l.params, grad);
                    l.grad_gamma.assign(g.gamma.begin(), g.gamma.end());
                    l.grad_beta.assign(g.beta.begin(), g.beta.end());
                    if (fault_ == BackwardFault::batchnorm_mean_term_dropped) {
                        const auto& s = input.shape();
                        const T count = static_cast<T>(s.n * s.plane());
                        for (std::size_t c = 0; c < s.c; ++c) {
                            const T restore = l.params.gamma[c] * l.cache.inv_std[c] * l.grad_beta[c] / count;
                            for (std::size_t n = 0; n < s.n; ++n) {
                                T* dx = g.input.plane(n, c);
                                for (std::size_t k = 0; k < s.plane(); ++k) dx[k] += restore;
                            }
                        }
                    }
                    return std::move(g.input);
                },
                [&](ReluLayer&) {
                    if (fault_ == BackwardFault::relu_gate_inverted) {
                        BasicTensor<T> flipped(input.shape());
                        for (std::size_t k = 0; k < input.size(); ++k) {
                            flipped[k] = input[k] > T{0} ? T{0} : grad[k];
                        }
                        return flipped;
                    }
                    return relu_backward(input, grad);
                },
                [&](SigmoidLayer&) { return sigmoid_backward(output, grad); },
            },
            layers_[i]);
    }
    return grad;
}

template <typename T>
std::vector<ParamSlot<T>> Sequential<T>::parameters() {
    std::vector<ParamSlot<T>> slots;
    for (auto& layer : layers_) {
        if (auto* conv = std::get_if<ConvLayer<T>>(&layer)) {
            conv->grad_weights.resize(conv->params.weights.size(), T{0});
            conv->grad_bias.resize(conv->params.bias.size(), T{0});
            slots.push_back({conv->params.weights, conv->grad_weights});
            slots.push_back({conv->params.bias, conv->grad_bias});
        } else if (auto* bn = std::get_if<BatchNormLayer<T>>(&layer)) {
            bn->grad_gamma.resize(bn->params.channels, T{0});
            bn->grad_beta.resize(bn->params.channels, T{0});
            slots.push_back({bn->params.gamma, bn->grad_gamma});
            slots.push_back({bn->params.beta, bn->grad_beta});
        }
    }
    return slots;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) {
        if (const auto* conv = std::get_if<ConvLayer<T>>(&layer)) {
            count += conv->params.weights.size() + conv->params.bias.size();
        } else if (const auto* bn = std::get_if<BatchNormLayer<T>>(&layer)) {
            count += 2 * bn->params.channels;
        }
    }
    return count;
}

template <typename T>
template <typename U>
Sequential<U> Sequential<T>::cast() const {
    Sequential<U> out;
    for (const auto& layer : layers_) {
        std::visit(Overloaded{
                       [&](const ConvLayer<T>& l) {
                           ConvLayer<U> c;
                           c.params.out_channels = l.params.out_channels;
                           c.params.in_channels = l.params.in_channels;
                           c.params.weights = convert<U>(l.params.weights);
                           c.params.bias = convert<U>(l.params.bias);
                           out.add(std::move(c));
                       },
                       [&](const BatchNormLayer<T>& l) {
                           BatchNormLayer<U> b;
                           b.params.channels = l.params.channels;
                           b.params.gamma = convert<U>(l.params.gamma);
                           b.params.beta = convert<U>(l.params.beta);
                           b.params.running_mean = convert<U>(l.params.running_mean);
                           b.params.running_var = convert<U>(l.params.running_var);
                           b.params.eps = static_cast<U>(l.params.eps);
                           b.params.momentum = static_cast<U>(l.params.momentum);
                           out.add(std::move(b));
                       },
                       [&](const ReluLayer&) { out.add(ReluLayer{}); },
                       [&](const SigmoidLayer&) { out.add(SigmoidLayer{}); },
                   },
                   layer);
    }
    return out;
}

template <typename T>
void write_layers(std::ostream& out, const Sequential<T>& net) {
    using namespace detail;
    write_u32(out, static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& layer : net.layers()) {
        std::visit(Overloaded{
                       [&](const ConvLayer<T>& l) {
                           write_u32(out, kConvTag);
                           write_u32(out, 4);
                           write_u32(out, static_cast<std::uint32_t>(l.params.out_channels));
                           write_u32(out, static_cast<std::uint32_t>(l.params.in_channels));
                           write_u32(out, 3);
                           write_u32(out, 3);
                           write_f32_array(out, l.params.weights);
                           write_f32_array(out, l.params.bias);
                       },
                       [&](const BatchNormLayer<T>& l) {
                           write_u32(out, kBatchNormTag);
                           write_u32(out, 1);
                           write_u32(out, static_cast<std::uint32_t>(l.params.channels));
                           write_f32_array(out, l.params.gamma);
                           write_f32_array(out, l.params.beta);
                           write_f32_array(out, l.params.running_mean);
                           write_f32_array(out, l.params.running_var);
                           write_f32(out, static_cast<float>(l.params.eps));
                           write_f32(out, static_cast<float>(l.params.momentum));
                       },
                       [&](const ReluLayer&) {
                           write_u32(out, kReluTag);
                           write_u32(out, 0);
                       },
                       [&](const SigmoidLayer&) {
                           write_u32(out, kSigmoidTag);
                           write_u32(out, 0);
                       },
                   },
                   layer);
    }
}

template <typename T>
Sequential<T> read_layers(std::istream& in) {
    using namespace detail;
    constexpr std::uint32_t kMaxLayers = 4096;
    constexpr std::uint32_t kMaxChannels = 1u << 16;
    const char* what = "checkpoint layer block";
    const std::uint32_t count = read_u32(in, what);
    if (count > kMaxLayers) throw DataError("checkpoint declares an implausible layer count");
    Sequential<T> net;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t tag = read_u32(in, what);
        const std::uint32_t ndims = read_u32(in, what);
        std::vector<std::uint32_t> dims(ndims > 8 ? 0 : ndims);
        if (ndims > 8) throw DataError("checkpoint layer has too many dimensions");
        for (auto& d : dims) d = read_u32(in, what);
        switch (tag) {
        case kConvTag: {
            if (ndims != 4 || dims[2] != 3 || dims[3] != 3 || dims[0] == 0 || dims[1] == 0 ||
                dims[0] > kMaxChannels || dims[1] > kMaxChannels) {
                throw DataError("checkpoint conv layer has an invalid shape");
            }
            ConvLayer<T> l;
            l.params.out_channels = dims[0];
            l.params.in_channels = dims[1];
            l.params.weights = read_f32_array<T>(in, std::size_t{dims[0]} * dims[1] * 9, what);
            l.params.bias = read_f32_array<T>(in, dims[0], what);
            net.add(std::move(l));
            break;
        }
        case kBatchNormTag: {
            if (ndims != 1 || dims[0] == 0 || dims[0] > kMaxChannels) {
                throw DataError("checkpoint batchnorm layer has an invalid shape");
            }
            BatchNormLayer<T> l;
            l.params.channels = dims[0];
            l.params.gamma = read_f32_array<T>(in, dims[0], what);
            l.params.beta = read_f32_array<T>(in, dims[0], what);
            l.params.running_mean = read_f32_array<T>(in, dims[0], what);
            l.params.running_var = read_f32_array<T>(in, dims[0], what);
            l.params.eps = static_cast<T>(read_f32(in, what));
            l.params.momentum = static_cast<T>(read_f32(in, what));
            if (!(l.params.eps > T{0})) throw DataError("checkpoint batchnorm eps must be positive");
            for (const T v : l.params.running_var) {
                if (!(v >= T{0})) throw DataError("checkpoint batchnorm running variance is negative");
            }
            net.add(std::move(l));
            break;
        }
        case kReluTag:
            if (ndims != 0) throw DataError("checkpoint relu layer carries a shape");
            net.add(ReluLayer{});
            break;
        case kSigmoidTag:
            if (ndims != 0) throw DataError("checkpoint sigmoid layer carries a shape");
            net.add(SigmoidLayer{});
            break;
        default: throw DataError("checkpoint contains unknown layer tag " + std::to_string(tag));
        }
    }
    return net;
}

template class Sequential<float>;
template class Sequential<double>;
template Sequential<double> Sequential<float>::cast<double>() const;
template Sequential<float> Sequential<double>::cast<float>() const;
template Sequential<float> Sequential<float>::cast<float>() const;
template Sequential<double> Sequential<double>::cast<double>() const;
template void write_layers(std::ostream&, const Sequential<float>&);
template void write_layers(std::ostream&, const Sequential<double>&);
template Sequential<float> read_layers<float>(std::istream&);
template Sequential<double> read_layers<double>(std::istream&);

} // namespace idcnn::nn
