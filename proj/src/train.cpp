#include "idcnn/train.hpp"

#include <numeric>

#include "idcnn/layers.hpp"

namespace idcnn {

std::pair<nn::Tensor, nn::Tensor> make_batch(const PatchSet& patches, std::span<const std::size_t> indices) {
    require(!indices.empty(), "make_batch: empty batch");
    const std::size_t p = patches.patch_size;
    const std::size_t n = indices.size();
    nn::Tensor input(nn::Shape{n, 3, p, p});
    nn::Tensor target(nn::Shape{n, 1, p, p});
    for (std::size_t b = 0; b < n; ++b) {
        require(indices[b] < patches.patches.size(), "make_batch: patch index out of range");
        const Patch& patch = patches.patches[indices[b]];
        require(patch.noisy.same_size(p, p) && patch.map.same_size(p, p), "make_batch: patch has the wrong size");
        for (std::size_t y = 0; y < p; ++y) {
            for (std::size_t x = 0; x < p; ++x) {
                for (std::size_t c = 0; c < 3; ++c) {
                    input.at(b, c, y, x) = static_cast<float>(patch.noisy.at(y, x, c)) / 255.0f;
                }
                target.at(b, 0, y, x) = patch.map.at(y, x, 0) ? 1.0f : 0.0f;
            }
        }
    }
    return {std::move(input), std::move(target)};
}

TrainState train(IdcnnModel& model, const PatchSet& patches, const TrainConfig& config, TrainState state,
                 const EpochCallback& on_epoch) {
    config.validate();
    validate_architecture(model);
    require(!patches.patches.empty(), "train: no training patches");
    require(patches.patch_size == config.patch_size, "train: patch set size disagrees with the config");

    std::vector<std::size_t> order(patches.patches.size());
    for (std::size_t epoch = state.epochs_completed + 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, epoch));
        rng.shuffle(order.begin(), order.end());
        state.optimizer.lr = learning_rate(config, epoch);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, order.size() - start);
            const auto [input, target] = make_batch(patches, std::span(order).subspan(start, count));
            const auto pred = model.net.forward(input, nn::Mode::train);
            const auto loss = nn::mse_loss(pred, target);
            model.net.backward(loss.grad);
            model.net.clear_trace();
            const auto slots = model.net.parameters();
            nn::adam_step<float>(slots, state.optimizer);
            loss_sum += loss.loss;
            ++batches;
        }
        state.epochs_completed = epoch;
        state.loss_history.push_back(loss_sum / static_cast<double>(batches));
        if (on_epoch) on_epoch(epoch, model, state);
    }
    return state;
}

} // namespace idcnn
