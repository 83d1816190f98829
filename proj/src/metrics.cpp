#include "idcnn/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace idcnn {
namespace {

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* op) {
    require(a.same_size(b), std::string(op) + ": dimensions differ (" + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + ")");
}

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

constexpr std::size_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> taps{};
    double sum = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - 5.0;
        taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[i];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

// Separable 'valid' Gaussian filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::array<double, kSsimWindow>& taps) {
    const std::size_t ow = w - kSsimWindow + 1;
    const std::size_t oh = h - kSsimWindow + 1;
    std::vector<double> rows(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < kSsimWindow; ++k) s += taps[k] * plane[y * w + x + k];
            rows[y * ow + x] = s;
        }
    }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < kSsimWindow; ++k) s += taps[k] * rows[(y + k) * ow + x];
            out[y * ow + x] = s;
        }
    }
    return out;
}

} // namespace

ConfusionCounts confusion(const NoiseMap& truth, const NoiseMap& estimate) {
    require_same_size(truth, estimate, "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.data().size(); ++i) {
        const bool noisy = truth.data()[i] != 0;
        const bool flagged = estimate.data()[i] != 0;
        if (noisy && flagged) ++c.tp;
        else if (noisy) ++c.fn;
        else if (flagged) ++c.fp;
        else ++c.tn;
    }
    return c;
}

double wacc(const ConfusionCounts& c) {
    require(c.total() > 0, "wacc: empty confusion counts");
    const double rho = ratio(c.tp + c.fn, c.total());
    return rho * ratio(c.tp, c.tp + c.fn) + (1.0 - rho) * ratio(c.tn, c.tn + c.fp);
}

double fpr(const ConfusionCounts& c) { return ratio(c.fp, c.fp + c.tn); }

double fnr(const ConfusionCounts& c) { return ratio(c.fn, c.tp + c.fn); }

double mse(const ColorImage& reference, const ColorImage& restored) {
    require_same_size(reference, restored, "mse");
    require(!reference.empty(), "mse: empty image");
    std::uint64_t total = 0;
    const auto& a = reference.data();
    const auto& b = restored.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::int64_t d = static_cast<std::int64_t>(a[i]) - b[i];
        total += static_cast<std::uint64_t>(d * d);
    }
    return static_cast<double>(total) / static_cast<double>(a.size());
}

double psnr(const ColorImage& reference, const ColorImage& restored) {
    const double m = mse(reference, restored);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

double mae(const ColorImage& reference, const ColorImage& restored) {
    require_same_size(reference, restored, "mae");
    require(!reference.empty(), "mae: empty image");
    std::uint64_t total = 0;
    const auto& a = reference.data();
    const auto& b = restored.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        total += static_cast<std::uint64_t>(std::abs(static_cast<int>(a[i]) - static_cast<int>(b[i])));
    }
    return static_cast<double>(total) / static_cast<double>(a.size());
}

double ssim_c(const ColorImage& a, const ColorImage& b) {
    require_same_size(a, b, "ssim_c");
    require(a.height() >= kSsimWindow && a.width() >= kSsimWindow,
            "ssim_c: image smaller than the 11x11 window");
    constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const auto taps = gaussian_taps();
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    double channel_sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> x(h * w), y(h * w), xx(h * w), yy(h * w), xy(h * w);
        for (std::size_t i = 0; i < h * w; ++i) {
            x[i] = a.data()[i * 3 + c];
            y[i] = b.data()[i * 3 + c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, h, w, taps);
        const auto my = filter_valid(y, h, w, taps);
        const auto mxx = filter_valid(xx, h, w, taps);
        const auto myy = filter_valid(yy, h, w, taps);
        const auto mxy = filter_valid(xy, h, w, taps);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = mxx[i] - mx[i] * mx[i];
            const double vy = myy[i] - my[i] * my[i];
            const double cov = mxy[i] - mx[i] * my[i];
            sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        channel_sum += sum / static_cast<double>(mx.size());
    }
    return channel_sum / 3.0;
}

QualityReport quality(const ColorImage& reference, const ColorImage& restored) {
    return {psnr(reference, restored), mae(reference, restored), ssim_c(reference, restored)};
}

AimDiagram aim_diagram(const ColorImage& clean, const ColorImage& restored, const NoiseMap& truth,
                       const NoiseMap& estimate) {
    require_same_size(clean, restored, "aim_diagram");
    require_same_size(clean, truth, "aim_diagram");
    require_same_size(clean, estimate, "aim_diagram");
    require(!clean.empty(), "aim_diagram: empty image");
    std::array<std::uint64_t, 4> sums{}; // tp, fp, fn, tn
    for (std::size_t i = 0; i < truth.pixels(); ++i) {
        std::uint64_t err = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            err += static_cast<std::uint64_t>(
                std::abs(static_cast<int>(clean.data()[3 * i + c]) - static_cast<int>(restored.data()[3 * i + c])));
        }
        const bool noisy = truth.data()[i] != 0;
        const bool flagged = estimate.data()[i] != 0;
        sums[noisy ? (flagged ? 0 : 2) : (flagged ? 1 : 3)] += err;
    }
    const double norm = 3.0 * static_cast<double>(clean.pixels());
    return {sums[0] / norm, sums[1] / norm, sums[2] / norm, sums[3] / norm};
}

} // namespace idcnn
