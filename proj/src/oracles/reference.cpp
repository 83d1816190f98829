#include <cmath>
#include <cstdlib>
#include <limits>

#include "idcnn/oracles.hpp"

namespace idcnn::oracle {

nn::Tensor64 conv2d_loop(const nn::Tensor64& input, const nn::ConvParams<double>& params) {
    const auto s = input.shape();
    require(s.c == params.in_channels, "conv2d_loop: channel mismatch");
    nn::Tensor64 out(nn::Shape{s.n, params.out_channels, s.h, s.w});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t k = 0; k < params.out_channels; ++k)
            for (std::size_t y = 0; y < s.h; ++y)
                for (std::size_t x = 0; x < s.w; ++x) {
                    double acc = params.bias[k];
                    for (std::size_t c = 0; c < s.c; ++c)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const auto yy = static_cast<std::ptrdiff_t>(y) + dy;
                                const auto xx = static_cast<std::ptrdiff_t>(x) + dx;
                                if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(s.h) ||
                                    xx >= static_cast<std::ptrdiff_t>(s.w))
                                    continue;
                                const double w = params.weights[((k * s.c + c) * 3 + (dy + 1)) * 3 + (dx + 1)];
                                acc += w * input.at(n, c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
                            }
                    out.at(n, k, y, x) = acc;
                }
    return out;
}

double mse_loss_loop(const nn::Tensor64& pred, const nn::Tensor64& target) {
    require(pred.shape() == target.shape(), "mse_loss_loop: shape mismatch");
    const auto s = pred.shape();
    double total = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
        double item = 0.0;
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t y = 0; y < s.h; ++y)
                for (std::size_t x = 0; x < s.w; ++x) {
                    const double d = pred.at(n, c, y, x) - target.at(n, c, y, x);
                    item += d * d;
                }
        total += item / static_cast<double>(s.c * s.h * s.w);
    }
    return total / static_cast<double>(s.n);
}

ConfusionCounts confusion_loop(const NoiseMap& truth, const NoiseMap& estimate) {
    ConfusionCounts c;
    for (std::size_t y = 0; y < truth.height(); ++y)
        for (std::size_t x = 0; x < truth.width(); ++x) {
            const int t = truth.at(y, x, 0) ? 1 : 0;
            const int e = estimate.at(y, x, 0) ? 1 : 0;
            c.tp += static_cast<std::uint64_t>(t & e);
            c.fn += static_cast<std::uint64_t>(t & (1 - e));
            c.fp += static_cast<std::uint64_t>((1 - t) & e);
            c.tn += static_cast<std::uint64_t>((1 - t) & (1 - e));
        }
    return c;
}

double psnr_loop(const ColorImage& a, const ColorImage& b) {
    double sum = 0.0;
    for (std::size_t y = 0; y < a.height(); ++y)
        for (std::size_t x = 0; x < a.width(); ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                const double d = double(a.at(y, x, c)) - double(b.at(y, x, c));
                sum += d * d;
            }
    if (sum == 0.0) return std::numeric_limits<double>::infinity();
    const double m = sum / (3.0 * static_cast<double>(a.pixels()));
    return 20.0 * std::log10(255.0) - 10.0 * std::log10(m);
}

double mae_loop(const ColorImage& a, const ColorImage& b) {
    double sum = 0.0;
    for (std::size_t y = 0; y < a.height(); ++y)
        for (std::size_t x = 0; x < a.width(); ++x)
            for (std::size_t c = 0; c < 3; ++c) sum += std::abs(double(a.at(y, x, c)) - double(b.at(y, x, c)));
    return sum / (3.0 * static_cast<double>(a.pixels()));
}

double ssim_direct(const ColorImage& a, const ColorImage& b) {
    constexpr int r = 5;
    double g[11][11];
    double gsum = 0.0;
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j) {
            g[i + r][j + r] = std::exp(-(i * i + j * j) / (2.0 * 1.5 * 1.5));
            gsum += g[i + r][j + r];
        }
    const double c1 = std::pow(0.01 * 255.0, 2);
    const double c2 = std::pow(0.03 * 255.0, 2);
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0;
        std::size_t windows = 0;
        for (std::size_t y0 = 0; y0 + 11 <= a.height(); ++y0)
            for (std::size_t x0 = 0; x0 + 11 <= a.width(); ++x0) {
                double mx = 0, my = 0;
                for (int i = 0; i < 11; ++i)
                    for (int j = 0; j < 11; ++j) {
                        const double w = g[i][j] / gsum;
                        mx += w * a.at(y0 + i, x0 + j, c);
                        my += w * b.at(y0 + i, x0 + j, c);
                    }
                double vx = 0, vy = 0, cov = 0;
                for (int i = 0; i < 11; ++i)
                    for (int j = 0; j < 11; ++j) {
                        const double w = g[i][j] / gsum;
                        const double dx = a.at(y0 + i, x0 + j, c) - mx;
                        const double dy = b.at(y0 + i, x0 + j, c) - my;
                        vx += w * dx * dx;
                        vy += w * dy * dy;
                        cov += w * dx * dy;
                    }
                sum += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++windows;
            }
        total += sum / static_cast<double>(windows);
    }
    return total / 3.0;
}

ColorImage restore_brute(const ColorImage& noisy, const NoiseMap& map) {
    ColorImage out = noisy;
    const auto h = static_cast<long>(noisy.height());
    const auto w = static_cast<long>(noisy.width());
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            if (!map.at(y, x, 0)) continue;
            for (long half = 1;; ++half) {
                require(half <= h + w, "restore_brute: no clean pixel");
                long count = 0;
                long sums[3] = {0, 0, 0};
                for (long yy = y - half; yy <= y + half; ++yy)
                    for (long xx = x - half; xx <= x + half; ++xx) {
                        if (yy < 0 || xx < 0 || yy >= h || xx >= w || map.at(yy, xx, 0)) continue;
                        ++count;
                        for (int c = 0; c < 3; ++c) sums[c] += noisy.at(yy, xx, c);
                    }
                if (count == 0) continue;
                for (int c = 0; c < 3; ++c) {
                    // sums are non-negative, so half-up equals half away from zero
                    out.at(y, x, c) = static_cast<std::uint8_t>(std::floor(double(sums[c]) / double(count) + 0.5));
                }
                break;
            }
        }
    return out;
}

} // namespace idcnn::oracle
