#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hamlearn/dataset.hpp"
#include "hamlearn/neuralnet/adam.hpp"
#include "hamlearn/neuralnet/network.hpp"

namespace hamlearn::nn {

struct TrainConfig {
  int batch_size = 256;
  int epochs = 200;
  AdamConfig adam;
  std::uint64_t seed = 0;
  /// Fresh N(0, noise_eps) added to every training input each epoch.
  double noise_eps = 0.0;
  /// Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;
  /// Stop after this many epochs without a validation-loss improvement; 0 disables.
  int patience = 20;
  /// Learning rate multiplier applied after every epoch.
  double lr_decay = 1.0;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;  // mean of the epoch's batch losses
  double val_loss = 0.0;
  double val_similarity = 0.0;
  std::size_t val_undefined = 0;
};

struct TrainResult {
  std::vector<double> params;       // best validation epoch
  std::vector<double> last_params;  // after the last completed epoch
  AdamState optimizer;              // state after the last completed epoch
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  int last_epoch = 0;
};

struct ResumeState {
  AdamState optimizer;
  int epoch = 0;  // last completed epoch
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch Adam on mean per-sample MSE. Deterministic for a fixed config.
TrainResult train(const Network& initial, const std::vector<dataset::Sample>& train_set,
                  const std::vector<dataset::Sample>& val_set, const TrainConfig& config,
                  const std::optional<ResumeState>& resume = std::nullopt,
                  const EpochCallback& on_epoch = {});

struct SetMetrics {
  double mse = 0.0;
  double mean_similarity = 0.0;
  std::size_t undefined = 0;
};

SetMetrics evaluate_set(const Network& net, const std::vector<dataset::Sample>& samples);

/// Scales all of grad so its Euclidean norm is at most max_norm. Returns the
/// norm before clipping.
double clip_gradient(std::span<double> grad, double max_norm);

}  // namespace hamlearn::nn
