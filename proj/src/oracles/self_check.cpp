#include <algorithm>
#include <cmath>

#include "idcnn/grad_check.hpp"
#include "idcnn/model.hpp"
#include "idcnn/noise.hpp"
#include "idcnn/oracles.hpp"
#include "idcnn/restore.hpp"

namespace idcnn::oracle {
namespace {

constexpr double kGradTolerance = 1e-5;
constexpr double kFloatTolerance = 1e-6;
constexpr double kExactTolerance = 1e-9;

double rel(double a, double b) {
    if (a == b) return 0.0; // also covers inf == inf
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

nn::Tensor64 random_tensor(nn::Shape shape, Rng& rng) {
    nn::Tensor64 t(shape);
    for (auto& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
}

ColorImage random_image(std::size_t h, std::size_t w, Rng& rng) {
    ColorImage img(h, w);
    for (auto& v : img.data()) v = rng.byte();
    return img;
}

NoiseMap random_map(std::size_t h, std::size_t w, double rho, Rng& rng) {
    NoiseMap map(h, w);
    for (auto& v : map.data()) v = rng.bernoulli(rho) ? 1 : 0;
    return map;
}

nn::ConvLayer<double> random_conv(std::size_t out, std::size_t in, Rng& rng) {
    nn::ConvLayer<double> layer;
    layer.params = nn::ConvParams<double>(out, in);
    for (auto& v : layer.params.weights) v = rng.uniform(-0.5, 0.5);
    for (auto& v : layer.params.bias) v = rng.uniform(-0.1, 0.1);
    return layer;
}

nn::BatchNormLayer<double> random_bn(std::size_t c, Rng& rng) {
    nn::BatchNormLayer<double> layer{nn::BatchNormParams<double>(c), {}, {}, {}};
    for (auto& v : layer.params.gamma) v = rng.uniform(0.5, 1.5);
    for (auto& v : layer.params.beta) v = rng.uniform(-0.2, 0.2);
    return layer;
}

CheckResult grad_result(const std::string& name, nn::Sequential<double>& net, const nn::Tensor64& input,
                        const SelfCheckOptions& options) {
    net.set_fault(options.fault);
    nn::GradCheckOptions gc;
    gc.seed = options.seed;
    const auto report = nn::grad_check(net, input, gc);
    return {name + " (" + std::to_string(report.coordinates) + " coords, " + std::to_string(report.skipped_kinks) +
                " kinks skipped, worst " + report.worst_coordinate + ")",
            report.max_relative_error, kGradTolerance, report.max_relative_error < kGradTolerance};
}

} // namespace

bool SelfCheckReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

SelfCheckReport gradient_checks(const SelfCheckOptions& options) {
    SelfCheckReport report;
    Rng rng(derive_seed(options.seed, 1));
    const auto input = random_tensor(nn::Shape{2, 3, 6, 6}, rng);
    {
        nn::Sequential<double> net;
        net.add(random_conv(4, 3, rng));
        report.checks.push_back(grad_result("grad conv", net, input, options));
    }
    {
        nn::Sequential<double> net;
        net.add(random_bn(3, rng));
        report.checks.push_back(grad_result("grad batchnorm", net, input, options));
    }
    {
        nn::Sequential<double> net;
        net.add(nn::ReluLayer{});
        report.checks.push_back(grad_result("grad relu", net, input, options));
    }
    {
        nn::Sequential<double> net;
        net.add(nn::SigmoidLayer{});
        report.checks.push_back(grad_result("grad sigmoid", net, input, options));
    }
    {
        Rng init(derive_seed(options.seed, 2));
        auto model = build_model<double>(5, 4, init);
        // Non-trivial affine parameters so their gradients are exercised.
        for (auto& layer : model.net.layers()) {
            if (auto* bn = std::get_if<nn::BatchNormLayer<double>>(&layer)) {
                for (auto& v : bn->params.gamma) v = init.uniform(0.5, 1.5);
                for (auto& v : bn->params.beta) v = init.uniform(-0.2, 0.2);
            } else if (auto* conv = std::get_if<nn::ConvLayer<double>>(&layer)) {
                for (auto& v : conv->params.bias) v = init.uniform(-0.1, 0.1);
            }
        }
        const auto x = random_tensor(nn::Shape{2, 3, 7, 7}, rng);
        report.checks.push_back(grad_result("grad depth-5 model", model.net, x, options));
    }
    return report;
}

SelfCheckReport metric_checks(const SelfCheckOptions& options) {
    Rng rng(derive_seed(options.seed, 3));
    double conv_err = 0, loss_err = 0, psnr_err = 0, mae_err = 0, ssim_err = 0, confusion_err = 0;
    for (std::size_t i = 0; i < options.oracle_instances; ++i) {
        const std::size_t h = 1 + rng.below(16);
        const std::size_t w = 1 + rng.below(16);
        const std::size_t n = 1 + rng.below(2);
        const std::size_t cin = 1 + rng.below(3);
        const std::size_t cout = 1 + rng.below(3);

        const auto x = random_tensor(nn::Shape{n, cin, h, w}, rng);
        const auto conv = random_conv(cout, cin, rng);
        const auto fast = nn::conv2d(x, conv.params);
        const auto slow = conv2d_loop(x, conv.params);
        for (std::size_t k = 0; k < fast.size(); ++k) conv_err = std::max(conv_err, rel(fast[k], slow[k]));

        const auto target = random_tensor(fast.shape(), rng);
        loss_err = std::max(loss_err, rel(nn::mse_loss(fast, target).loss, mse_loss_loop(fast, target)));

        const auto a = random_image(h, w, rng);
        ColorImage b = a;
        const double rho = rng.uniform();
        for (auto& v : b.data()) {
            if (rng.bernoulli(rho)) v = rng.byte();
        }
        psnr_err = std::max(psnr_err, rel(psnr(a, b), psnr_loop(a, b)));
        mae_err = std::max(mae_err, rel(mae(a, b), mae_loop(a, b)));

        const auto truth = random_map(h, w, rng.uniform(), rng);
        const auto est = random_map(h, w, rng.uniform(), rng);
        const auto fc = confusion(truth, est);
        const auto sc = confusion_loop(truth, est);
        confusion_err = std::max({confusion_err, rel(double(fc.tp), double(sc.tp)), rel(double(fc.tn), double(sc.tn)),
                                  rel(double(fc.fp), double(sc.fp)), rel(double(fc.fn), double(sc.fn))});

        // SSIM needs an 11x11 window to fit.
        const std::size_t sh = 11 + rng.below(6);
        const std::size_t sw = 11 + rng.below(6);
        const auto sa = random_image(sh, sw, rng);
        ColorImage sb = sa;
        for (auto& v : sb.data()) {
            const int d = static_cast<int>(rng.below(41)) - 20;
            v = static_cast<std::uint8_t>(std::clamp(int(v) + d, 0, 255));
        }
        ssim_err = std::max(ssim_err, rel(ssim_c(sa, sb), ssim_direct(sa, sb)));
    }
    SelfCheckReport report;
    const auto add = [&](const std::string& name, double value, double tol) {
        report.checks.push_back({name, value, tol, value <= tol});
    };
    add("oracle conv2d", conv_err, kFloatTolerance);
    add("oracle mse_loss", loss_err, kFloatTolerance);
    add("oracle psnr", psnr_err, kFloatTolerance);
    add("oracle mae", mae_err, kExactTolerance);
    add("oracle ssim_c", ssim_err, kFloatTolerance);
    add("oracle confusion", confusion_err, kExactTolerance);
    return report;
}

SelfCheckReport restore_checks(const SelfCheckOptions& options) {
    Rng rng(derive_seed(options.seed, 4));
    std::size_t mismatches = 0;
    std::size_t switching_violations = 0;
    std::size_t done = 0;
    while (done < options.restore_instances) {
        const double rho = 0.1 * static_cast<double>(1 + done % 9);
        const auto img = random_image(16, 16, rng);
        const auto map = random_map(16, 16, rho, rng);
        if (count_flagged(map) == map.pixels()) continue; // nothing to restore from
        ++done;
        const auto fast = adaptive_mean_restore(img, map);
        if (!(fast == restore_brute(img, map))) ++mismatches;
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 16; ++x)
                for (std::size_t c = 0; c < 3; ++c)
                    if (!map.at(y, x, 0) && fast.at(y, x, c) != img.at(y, x, c)) ++switching_violations;
    }
    SelfCheckReport report;
    report.checks.push_back({"oracle restore (mismatching images of " + std::to_string(done) + ")",
                             double(mismatches), 0.0, mismatches == 0});
    report.checks.push_back({"switching property (changed clean channels)", double(switching_violations), 0.0,
                             switching_violations == 0});
    return report;
}

SelfCheckReport run_self_check(const SelfCheckOptions& options) {
    SelfCheckReport report = gradient_checks(options);
    for (auto part : {metric_checks(options), restore_checks(options)}) {
        report.checks.insert(report.checks.end(), part.checks.begin(), part.checks.end());
    }
    return report;
}

} // namespace idcnn::oracle
