#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "idcnn/dataset.hpp"
#include "idcnn/random.hpp"
#include "idcnn/sequential.hpp"

namespace idcnn {

/// Impulse detection network:
///   conv(3->F) relu, (depth - 2) x [conv(F->F) batchnorm relu], conv(F->1) sigmoid
template <typename T>
struct BasicModel {
    std::size_t depth = 0;
    std::size_t filters = 0;
    nn::Sequential<T> net;

    template <typename U>
    BasicModel<U> cast() const {
        return BasicModel<U>{depth, filters, net.template cast<U>()};
    }
};

using IdcnnModel = BasicModel<float>;
using IdcnnModel64 = BasicModel<double>;

/// Glorot-uniform conv weights drawn in layer order, zero biases,
/// batchnorm gamma = 1 and beta = 0. Requires depth >= 3 and filters >= 1.
template <typename T>
BasicModel<T> build_model(std::size_t depth, std::size_t filters, Rng& rng);

/// Throws DataError unless the layer stack has exactly the shape above.
template <typename T>
void validate_architecture(const BasicModel<T>& model);

struct LayerCounts {
    std::size_t conv = 0;
    std::size_t batchnorm = 0;
    std::size_t relu = 0;
    std::size_t sigmoid = 0;
};

template <typename T>
LayerCounts count_layers(const nn::Sequential<T>& net);

struct TrainConfig {
    std::size_t depth = 17;
    std::size_t filters = 64;
    std::size_t epochs = 50;
    double lr = 1e-3;
    double lr_decay = 0.1;
    /// Last epoch (1-based) trained at the initial rate.
    std::size_t decay_epoch = 30;
    std::size_t batch_size = 128;
    std::size_t patch_size = 41;
    TrainingNoise noise;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Rate used during 1-based epoch: lr for epochs <= decay_epoch, lr * lr_decay after.
double learning_rate(const TrainConfig& config, std::size_t epoch);

/// Plain key=value rendering of a config (also used in checkpoint headers
/// and CSV comment headers) and its inverse.
std::string format_config(const TrainConfig& config);
TrainConfig parse_config(const std::string& text);

struct TrainState {
    nn::AdamState<float> optimizer;
    std::size_t epochs_completed = 0;
    std::vector<double> loss_history;
};

struct Checkpoint {
    IdcnnModel model;
    TrainConfig config;
    TrainState state;
};

/// Binary checkpoint (docs/file_formats.md): magic, version, text header,
/// layer block, optimizer block, loss history.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

} // namespace idcnn
