#pragma once

#include <functional>

#include "idcnn/model.hpp"

namespace idcnn {

/// Called after every epoch with the 1-based epoch number.
using EpochCallback = std::function<void(std::size_t epoch, const IdcnnModel& model, const TrainState& state)>;

/// Mini-batch ADAM on the per-pixel mean squared error between the predicted
/// and ground-truth noise maps, averaged over the batch.
///
/// Patch order is reshuffled every epoch from derive_seed(config.seed, epoch)
/// and the last partial batch is kept. Training continues from
/// state.epochs_completed, so a resumed run reproduces an uninterrupted one.
/// Returns the updated state; state.loss_history holds per-epoch mean losses.
TrainState train(IdcnnModel& model, const PatchSet& patches, const TrainConfig& config, TrainState state = {},
                 const EpochCallback& on_epoch = {});

/// Packs patches [indices] into NCHW input (scaled to [0, 1]) and target tensors.
std::pair<nn::Tensor, nn::Tensor> make_batch(const PatchSet& patches, std::span<const std::size_t> indices);

} // namespace idcnn
