#include "idcnn/image.hpp"

#include <algorithm>

namespace idcnn {

std::size_t count_flagged(const NoiseMap& map) {
    return static_cast<std::size_t>(std::count_if(map.data().begin(), map.data().end(), [](auto v) { return v != 0; }));
}

template <typename T>
nn::BasicTensor<T> to_tensor(const ColorImage& image) {
    nn::BasicTensor<T> out(nn::Shape{1, 3, image.height(), image.width()});
    for (std::size_t c = 0; c < 3; ++c) {
        T* plane = out.plane(0, c);
        for (std::size_t y = 0; y < image.height(); ++y) {
            for (std::size_t x = 0; x < image.width(); ++x) {
                plane[y * image.width() + x] = static_cast<T>(image.at(y, x, c)) / T{255};
            }
        }
    }
    return out;
}

template nn::BasicTensor<float> to_tensor(const ColorImage&);
template nn::BasicTensor<double> to_tensor(const ColorImage&);

} // namespace idcnn
