#include "idcnn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace idcnn::nn {
namespace {

double projected_loss(const Tensor64& output, const Tensor64& projection) {
    double total = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) total += output[i] * projection[i];
    return total;
}

// Sign pattern of every ReLU input in the most recent trace.
std::vector<bool> relu_pattern(const Sequential<double>& net) {
    std::vector<bool> pattern;
    const auto& trace = net.trace();
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        if (!std::holds_alternative<ReluLayer>(net.layers()[i])) continue;
        for (const double v : trace[i].values()) pattern.push_back(v > 0.0);
    }
    return pattern;
}

} // namespace

GradCheckReport grad_check(Sequential<double>& net, const Tensor64& input, const GradCheckOptions& options) {
    Rng rng(options.seed);
    Tensor64 x = input;

    Tensor64 base = net.forward(x, Mode::train);
    Tensor64 projection(base.shape());
    for (auto& v : projection.values()) v = rng.uniform(-1.0, 1.0);
    const Tensor64 input_grad = net.backward(projection);

    auto slots = net.parameters();
    std::vector<std::vector<double>> analytic;
    for (const auto& slot : slots) analytic.emplace_back(slot.grad.begin(), slot.grad.end());

    GradCheckReport report;
    const auto probe = [&](double& coordinate, double expected, const std::string& label) {
        const double saved = coordinate;
        coordinate = saved + options.eps;
        const double plus = projected_loss(net.forward(x, Mode::train), projection);
        const auto plus_pattern = relu_pattern(net);
        coordinate = saved - options.eps;
        const double minus = projected_loss(net.forward(x, Mode::train), projection);
        const auto minus_pattern = relu_pattern(net);
        coordinate = saved;
        if (plus_pattern != minus_pattern) {
            ++report.skipped_kinks;
            return;
        }
        const double numeric = (plus - minus) / (2.0 * options.eps);
        const double denom = std::max({std::abs(expected), std::abs(numeric), options.denominator_floor});
        const double error = std::abs(expected - numeric) / denom;
        ++report.coordinates;
        if (error > report.max_relative_error || report.worst_coordinate.empty()) {
            report.max_relative_error = error;
            report.worst_coordinate = label;
        }
    };

    for (std::size_t s = 0; s < slots.size(); ++s) {
        auto values = slots[s].value;
        for (std::size_t i = 0; i < values.size(); ++i) {
            probe(values[i], analytic[s][i], "param[" + std::to_string(s) + "][" + std::to_string(i) + "]");
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe(x[i], input_grad[i], "input[" + std::to_string(i) + "]");
    }
    return report;
}

} // namespace idcnn::nn
