#include "idcnn/optim.hpp"

#include <cmath>
#include <string>

#include "idcnn/error.hpp"

namespace idcnn::nn {

template <typename T>
void adam_step(std::span<const ParamSlot<T>> slots, AdamState<T>& state) {
    if (state.m.empty() && state.v.empty()) {
        for (const auto& slot : slots) {
            state.m.emplace_back(slot.value.size(), T{0});
            state.v.emplace_back(slot.value.size(), T{0});
        }
    }
    require(state.m.size() == slots.size() && state.v.size() == slots.size(),
            "adam_step: optimizer holds " + std::to_string(state.m.size()) + " moment buffers for " +
                std::to_string(slots.size()) + " parameters");
    for (std::size_t s = 0; s < slots.size(); ++s) {
        require(slots[s].value.size() == slots[s].grad.size(), "adam_step: parameter/gradient size mismatch");
        require(state.m[s].size() == slots[s].value.size() && state.v[s].size() == slots[s].value.size(),
                "adam_step: moment buffer size mismatch");
    }

    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    const T b1 = static_cast<T>(state.beta1);
    const T b2 = static_cast<T>(state.beta2);
    const T step = static_cast<T>(state.lr / correction1);
    const T inv_c2 = static_cast<T>(1.0 / correction2);
    const T eps = static_cast<T>(state.eps);

    for (std::size_t s = 0; s < slots.size(); ++s) {
        auto value = slots[s].value;
        const auto grad = slots[s].grad;
        auto& m = state.m[s];
        auto& v = state.v[s];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const T g = grad[i];
            m[i] = b1 * m[i] + (T{1} - b1) * g;
            v[i] = b2 * v[i] + (T{1} - b2) * g * g;
            value[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
        }
    }
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    require(fan_in + fan_out > 0, "glorot: fan_in + fan_out must be positive");
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
void glorot_uniform_fill(std::span<T> values, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = glorot_limit(fan_in, fan_out);
    for (auto& x : values) x = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
BasicTensor<T> glorot_uniform_init(std::size_t out_channels, std::size_t in_channels, Rng& rng) {
    require(out_channels > 0 && in_channels > 0, "glorot_uniform_init: empty shape");
    BasicTensor<T> kernel(Shape{out_channels, in_channels, 3, 3});
    glorot_uniform_fill<T>(kernel.values(), in_channels * 9, out_channels * 9, rng);
    return kernel;
}

template void adam_step(std::span<const ParamSlot<float>>, AdamState<float>&);
template void adam_step(std::span<const ParamSlot<double>>, AdamState<double>&);
template void glorot_uniform_fill(std::span<float>, std::size_t, std::size_t, Rng&);
template void glorot_uniform_fill(std::span<double>, std::size_t, std::size_t, Rng&);
template BasicTensor<float> glorot_uniform_init(std::size_t, std::size_t, Rng&);
template BasicTensor<double> glorot_uniform_init(std::size_t, std::size_t, Rng&);

} // namespace idcnn::nn
