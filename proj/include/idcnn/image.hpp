#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "idcnn/error.hpp"
#include "idcnn/tensor.hpp"

namespace idcnn {

/// Row-major grid of pixels with interleaved channels.
template <typename T, std::size_t Channels>
class Raster {
public:
    using value_type = T;
    static constexpr std::size_t channels = Channels;

    Raster() = default;
    Raster(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(height * width * Channels, fill) {}
    Raster(std::size_t height, std::size_t width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        require(data_.size() == height_ * width_ * Channels, "raster data length does not match dimensions");
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixels() const { return height_ * width_; }
    bool empty() const { return data_.empty(); }
    bool same_size(std::size_t h, std::size_t w) const { return h == height_ && w == width_; }
    template <typename Other>
    bool same_size(const Other& other) const {
        return other.height() == height_ && other.width() == width_;
    }

    T& at(std::size_t y, std::size_t x, std::size_t c = 0) { return data_[(y * width_ + x) * Channels + c]; }
    const T& at(std::size_t y, std::size_t x, std::size_t c = 0) const {
        return data_[(y * width_ + x) * Channels + c];
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool operator==(const Raster&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

/// 8-bit RGB image; channel values 0..255.
using ColorImage = Raster<std::uint8_t, 3>;
/// Binary impulse map: 1 = impulse (noisy), 0 = clean.
using NoiseMap = Raster<std::uint8_t, 1>;
/// Per-pixel impulse probability in (0, 1) as estimated by the detector.
using ProbabilityMap = Raster<float, 1>;

/// Counter-clockwise quarter turn: out(y, x) = in(x, w - 1 - y).
template <typename T, std::size_t C>
Raster<T, C> rotate90(const Raster<T, C>& in) {
    Raster<T, C> out(in.width(), in.height());
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = in.at(x, in.width() - 1 - y, c);
        }
    }
    return out;
}

template <typename T, std::size_t C>
Raster<T, C> rotate(const Raster<T, C>& in, int quarter_turns) {
    Raster<T, C> out = in;
    for (int i = 0; i < ((quarter_turns % 4) + 4) % 4; ++i) out = rotate90(out);
    return out;
}

/// Mirrors rows: out(y, x) = in(h - 1 - y, x).
template <typename T, std::size_t C>
Raster<T, C> flip_up_down(const Raster<T, C>& in) {
    Raster<T, C> out(in.height(), in.width());
    for (std::size_t y = 0; y < in.height(); ++y) {
        for (std::size_t x = 0; x < in.width(); ++x) {
            for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = in.at(in.height() - 1 - y, x, c);
        }
    }
    return out;
}

template <typename T, std::size_t C>
Raster<T, C> crop(const Raster<T, C>& in, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
    require(y0 + h <= in.height() && x0 + w <= in.width(), "crop window exceeds image bounds");
    Raster<T, C> out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = in.at(y0 + y, x0 + x, c);
        }
    }
    return out;
}

/// Number of flagged pixels in a binary map.
std::size_t count_flagged(const NoiseMap& map);

/// Planar 1x3xHxW tensor with channel values scaled to [0, 1].
template <typename T>
nn::BasicTensor<T> to_tensor(const ColorImage& image);

} // namespace idcnn
