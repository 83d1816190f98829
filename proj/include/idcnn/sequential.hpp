#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "idcnn/layers.hpp"
#include "idcnn/optim.hpp"

namespace idcnn::nn {

template <typename T>
struct ConvLayer {
    ConvParams<T> params;
    std::vector<T> grad_weights;
    std::vector<T> grad_bias;
};

template <typename T>
struct BatchNormLayer {
    BatchNormParams<T> params;
    std::vector<T> grad_gamma;
    std::vector<T> grad_beta;
    BatchNormCache<T> cache;
};

struct ReluLayer {};
struct SigmoidLayer {};

template <typename T>
using Layer = std::variant<ConvLayer<T>, BatchNormLayer<T>, ReluLayer, SigmoidLayer>;

/// Deliberate backward-pass defects used to self-test the gradient checker.
enum class BackwardFault {
    none,
    conv_weight_grad_doubled,
    relu_gate_inverted,
    batchnorm_mean_term_dropped,
};

std::string to_string(BackwardFault fault);
BackwardFault parse_backward_fault(const std::string& name);

/// Fixed-order layer stack with explicit forward/backward passes.
///
/// forward() in train mode records the input of every layer; backward()
/// consumes that trace and overwrites the parameter gradients.
template <typename T>
class Sequential {
public:
    void add(Layer<T> layer);

    std::vector<Layer<T>>& layers() { return layers_; }
    const std::vector<Layer<T>>& layers() const { return layers_; }

    BasicTensor<T> forward(const BasicTensor<T>& input, Mode mode);
    BasicTensor<T> forward(const BasicTensor<T>& input) const;

    /// Returns dL/d(input) of the last train-mode forward call.
    BasicTensor<T> backward(const BasicTensor<T>& grad_out);

    /// Layer inputs recorded by the last train-mode forward; the final entry
    /// is the network output.
    const std::vector<BasicTensor<T>>& trace() const { return trace_; }
    void clear_trace() { trace_.clear(); }

    /// Trainable buffers in layer order: conv weights, conv bias, BN gamma, BN beta.
    std::vector<ParamSlot<T>> parameters();
    std::size_t parameter_count() const;

    void set_fault(BackwardFault fault) { fault_ = fault; }

    template <typename U>
    Sequential<U> cast() const;

private:
    std::vector<Layer<T>> layers_;
    std::vector<BasicTensor<T>> trace_;
    BackwardFault fault_ = BackwardFault::none;
};

/// Layer block of the checkpoint format (see docs/file_formats.md).
template <typename T>
void write_layers(std::ostream& out, const Sequential<T>& net);
template <typename T>
Sequential<T> read_layers(std::istream& in);

extern template class Sequential<float>;
extern template class Sequential<double>;

} // namespace idcnn::nn
