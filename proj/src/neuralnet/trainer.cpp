#include "hamlearn/neuralnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/neuralnet/metrics.hpp"
#include "hamlearn/record.hpp"

namespace hamlearn::nn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (noise_eps < 0.0) throw std::invalid_argument("noise_eps must be non-negative");
  if (grad_clip < 0.0) throw std::invalid_argument("grad_clip must be non-negative");
  if (patience < 0) throw std::invalid_argument("patience must be non-negative");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw std::invalid_argument("lr_decay must be in (0, 1]");
}

double clip_gradient(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

SetMetrics evaluate_set(const Network& net, const std::vector<dataset::Sample>& samples) {
  SetMetrics out;
  if (samples.empty()) return out;
  const auto preds = net.predict_all(samples);
  double mse = 0.0, sim = 0.0;
  std::size_t defined = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    mse += mse_loss(preds[k], samples[k].target);
    try {
      sim += cosine_similarity(preds[k], samples[k].target);
      ++defined;
    } catch (const UndefinedSimilarityError&) {
      ++out.undefined;
    }
  }
  out.mse = mse / static_cast<double>(samples.size());
  out.mean_similarity = defined ? sim / static_cast<double>(defined) : 0.0;
  return out;
}

TrainResult train(const Network& initial, const std::vector<dataset::Sample>& train_set,
                  const std::vector<dataset::Sample>& val_set, const TrainConfig& config,
                  const std::optional<ResumeState>& resume, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  const auto& arch = initial.arch();
  const std::size_t per_in = static_cast<std::size_t>(arch.seq_len) *
                             static_cast<std::size_t>(arch.input_dim);
  const std::size_t M = arch.target_length();
  auto check = [&](const std::vector<dataset::Sample>& set, const char* which) {
    for (const auto& s : set) {
      if (s.input.size() != per_in || s.target.size() != M) {
        throw ShapeError(std::string(which) + " sample shape (" + std::to_string(s.input.size()) +
                         " inputs, " + std::to_string(s.target.size()) +
                         " targets) disagrees with the network (" + std::to_string(per_in) +
                         ", " + std::to_string(M) + ")");
      }
    }
  };
  check(train_set, "training");
  check(val_set, "validation");

  Network net(arch, std::vector<double>(initial.params().begin(), initial.params().end()));
  TrainResult result;
  int first_epoch = 1;
  if (resume) {
    if (resume->optimizer.m.size() != net.params().size()) {
      throw ShapeError("resumed optimizer state does not match the network");
    }
    result.optimizer = resume->optimizer;
    first_epoch = resume->epoch + 1;
  } else {
    result.optimizer = AdamState(config.adam, net.params().size());
  }
  // Schedule is a function of the epoch number so resumed runs continue it.
  auto lr_for = [&](int epoch) {
    return config.adam.learning_rate * std::pow(config.lr_decay, epoch - 1);
  };

  const std::size_t n = train_set.size();
  const std::size_t B = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::vector<double> grad(net.params().size()), in, tgt;
  ForwardCache cache;
  double best_val = std::numeric_limits<double>::infinity();
  result.params.assign(net.params().begin(), net.params().end());
  result.best_epoch = first_epoch - 1;
  result.last_epoch = first_epoch - 1;
  int since_best = 0;

  for (int epoch = first_epoch; epoch <= config.epochs; ++epoch) {
    result.optimizer.config.learning_rate = lr_for(epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(dataset::derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += B) {
      const std::size_t nb = std::min(B, n - start);
      in.resize(nb * per_in);
      tgt.resize(nb * M);
      for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t idx = order[start + k];
        const auto& s = train_set[idx];
        auto dst = in.begin() + static_cast<std::ptrdiff_t>(k * per_in);
        std::copy(s.input.begin(), s.input.end(), dst);
        if (config.noise_eps > 0.0) {
          const std::uint64_t noise_seed = dataset::derive_seed(
              config.seed ^ 0x6E6F697365ULL,
              static_cast<std::uint64_t>(epoch) * n + static_cast<std::uint64_t>(idx));
          record::add_gaussian_noise_inplace(std::span<double>(&*dst, per_in), config.noise_eps,
                                             noise_seed);
        }
        std::copy(s.target.begin(), s.target.end(),
                  tgt.begin() + static_cast<std::ptrdiff_t>(k * M));
      }
      loss_sum += net.loss_and_grad(in, tgt, static_cast<int>(nb), grad, cache);
      ++batches;
      if (config.grad_clip > 0.0) clip_gradient(grad, config.grad_clip);
      adam_step(net.params(), grad, result.optimizer);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = loss_sum / static_cast<double>(batches);
    const SetMetrics val = evaluate_set(net, val_set.empty() ? train_set : val_set);
    em.val_loss = val.mse;
    em.val_similarity = val.mean_similarity;
    em.val_undefined = val.undefined;
    result.history.push_back(em);
    result.last_epoch = epoch;
    if (on_epoch) on_epoch(em);

    if (em.val_loss < best_val) {
      best_val = em.val_loss;
      result.best_epoch = epoch;
      result.params.assign(net.params().begin(), net.params().end());
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  result.last_params.assign(net.params().begin(), net.params().end());
  return result;
}

}  // namespace hamlearn::nn
