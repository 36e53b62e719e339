#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "discrimq/errors.hpp"
#include "discrimq/nn/optim.hpp"
#include "discrimq/nn/param_store.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::nn {

struct TrainSchedule {
    std::size_t epochs = 30;
    std::size_t batch_size = 50;
    AdamConfig adam{};
    double clip_norm = 5.0;
};

/// Returns the batch's mean loss after accumulating the gradient of that
/// mean into the (already zeroed) store.
using BatchLoss = std::function<double(std::span<std::size_t const> batch)>;

/// Shuffled minibatch loop: zero_grad, loss, clip, Adam. Returns the
/// sample-weighted mean loss of each epoch.
template <typename T>
std::vector<double> run_minibatch_training(ParamStore<T>& store, std::size_t num_samples,
                                           TrainSchedule const& schedule, Rng& rng, BatchLoss const& batch_loss) {
    if (schedule.batch_size == 0) {
        throw ConfigError("batch size must be positive");
    }
    std::vector<std::size_t> order(num_samples);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> losses;
    for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
        rng.shuffle(order);
        double total = 0.0;
        for (std::size_t start = 0; start < num_samples; start += schedule.batch_size) {
            std::size_t const end = std::min(num_samples, start + schedule.batch_size);
            std::span<std::size_t const> batch(order.data() + start, end - start);
            store.zero_grad();
            total += batch_loss(batch) * static_cast<double>(batch.size());
            clip_gradients(store, schedule.clip_norm);
            adam_update(store, schedule.adam);
        }
        losses.push_back(num_samples == 0 ? 0.0 : total / static_cast<double>(num_samples));
    }
    return losses;
}

}  // namespace discrimq::nn
