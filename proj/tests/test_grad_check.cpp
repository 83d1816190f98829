#include <gtest/gtest.h>

#include "idcnn/grad_check.hpp"
#include "idcnn/model.hpp"
#include "idcnn/oracles.hpp"

using namespace idcnn;
using namespace idcnn::nn;

namespace {

Tensor64 random_tensor(Shape s, Rng& rng) {
    Tensor64 t(s);
    for (auto& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
}

ConvLayer<double> conv_layer(std::size_t out, std::size_t in, Rng& rng) {
    ConvLayer<double> layer;
    layer.params = ConvParams<double>(out, in);
    for (auto& v : layer.params.weights) v = rng.uniform(-0.5, 0.5);
    return layer;
}

} // namespace

TEST(GradCheck, LinearConvIsExactUpToRoundoff) {
    Rng rng(1);
    // Single nonzero pixel surrounded by zeros.
    Tensor64 x(Shape{1, 2, 5, 5});
    x.at(0, 0, 2, 2) = 0.7;
    x.at(0, 1, 2, 2) = -0.3;
    Sequential<double> net;
    net.add(conv_layer(3, 2, rng));
    // Central differences are exact for a linear map at any step; a wider
    // step only shrinks the roundoff.
    GradCheckOptions options;
    options.eps = 1e-2;
    EXPECT_LT(grad_check(net, x, options).max_relative_error, 1e-9);
}

TEST(GradCheck, ConvBnReluSigmoidStack) {
    Rng rng(2);
    Sequential<double> net;
    net.add(conv_layer(4, 3, rng));
    net.add(BatchNormLayer<double>{BatchNormParams<double>(4), {}, {}, {}});
    net.add(ReluLayer{});
    net.add(conv_layer(4, 4, rng));
    net.add(BatchNormLayer<double>{BatchNormParams<double>(4), {}, {}, {}});
    net.add(ReluLayer{});
    net.add(conv_layer(1, 4, rng));
    net.add(SigmoidLayer{});
    const auto report = grad_check(net, random_tensor(Shape{2, 3, 6, 6}, rng));
    EXPECT_LT(report.max_relative_error, 1e-5) << report.worst_coordinate;
    EXPECT_GT(report.coordinates, 0u);
}

TEST(GradCheck, Depth5Model) {
    Rng rng(3);
    auto model = build_model<double>(5, 4, rng);
    const auto report = grad_check(model.net, random_tensor(Shape{2, 3, 7, 7}, rng));
    EXPECT_LT(report.max_relative_error, 1e-5) << report.worst_coordinate;
}

class FaultInjection : public ::testing::TestWithParam<BackwardFault> {};

TEST_P(FaultInjection, IsDetected) {
    Rng rng(4);
    auto model = build_model<double>(4, 3, rng);
    model.net.set_fault(GetParam());
    const auto report = grad_check(model.net, random_tensor(Shape{2, 3, 6, 6}, rng));
    EXPECT_GT(report.max_relative_error, 0.1) << to_string(GetParam());
}

INSTANTIATE_TEST_SUITE_P(AllFaults, FaultInjection,
                         ::testing::Values(BackwardFault::conv_weight_grad_doubled, BackwardFault::relu_gate_inverted,
                                           BackwardFault::batchnorm_mean_term_dropped));

TEST(GradCheck, FaultNamesRoundTrip) {
    for (auto f : {BackwardFault::none, BackwardFault::conv_weight_grad_doubled, BackwardFault::relu_gate_inverted,
                   BackwardFault::batchnorm_mean_term_dropped}) {
        EXPECT_EQ(parse_backward_fault(to_string(f)), f);
    }
    EXPECT_THROW(parse_backward_fault("nope"), ContractError);
}

TEST(SelfCheck, CleanBuildPassesAndFaultFails) {
    oracle::SelfCheckOptions options;
    options.oracle_instances = 40;
    options.restore_instances = 60;
    EXPECT_TRUE(oracle::run_self_check(options).passed());
    options.fault = BackwardFault::batchnorm_mean_term_dropped;
    EXPECT_FALSE(oracle::gradient_checks(options).passed());
}
