#include "idcnn/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace idcnn::nn {

std::string to_string(const Shape& shape) {
    return "(" + std::to_string(shape.n) + ", " + std::to_string(shape.c) + ", " + std::to_string(shape.h) + ", " +
           std::to_string(shape.w) + ")";
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class BasicTensor<float>;
template class BasicTensor<double>;

} // namespace idcnn::nn
