#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "idcnn/error.hpp"

namespace idcnn::nn {

/// NCHW dimensions.
struct Shape {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    std::size_t size() const { return n * c * h * w; }
    std::size_t plane() const { return h * w; }
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

/// Dense NCHW array, row-major. Float for training, double for verification.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.size(), fill) {}
    BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        require(data_.size() == shape_.size(), "tensor data length does not match shape " + to_string(shape_));
    }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }
    T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) { return data_[index(n, c, y, x)]; }
    const T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[index(n, c, y, x)];
    }

    /// Pointer to the h*w plane of (item, channel).
    T* plane(std::size_t n, std::size_t c) { return data_.data() + (n * shape_.c + c) * shape_.plane(); }
    const T* plane(std::size_t n, std::size_t c) const {
        return data_.data() + (n * shape_.c + c) * shape_.plane();
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    template <typename U>
    BasicTensor<U> cast() const {
        return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

    bool all_finite() const;

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

} // namespace idcnn::nn
