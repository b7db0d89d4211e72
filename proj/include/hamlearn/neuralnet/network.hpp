#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hamlearn/dataset.hpp"
#include "hamlearn/neuralnet/lstm.hpp"

namespace hamlearn::nn {

inline constexpr int kDefaultHidden = 256;

enum class HeadKind {
  kDense,    // affine map of the final encoder state (static parameters)
  kDecoder,  // LSTM decoder + per-step projection, plus affine static head
};

struct NetworkArch {
  int input_dim = 3;  // 3N
  int seq_len = 1;    // S, encoder steps
  int hidden = kDefaultHidden;
  HeadKind head = HeadKind::kDense;
  int output_dim = 1;     // kDense: M
  int decoder_steps = 0;  // kDecoder: S'
  int step_outputs = 0;   // kDecoder: time-dependent values per step (N)
  int static_outputs = 0; // kDecoder: N - 1 couplings

  std::size_t target_length() const;
  void validate() const;
  bool operator==(const NetworkArch&) const = default;

  /// Architecture matching a dataset's record and target shapes.
  static NetworkArch for_dataset(const dataset::DatasetMeta& meta, int hidden = kDefaultHidden);
};

std::string head_name(HeadKind k);
HeadKind parse_head(const std::string& name);

/// One named tensor inside the flat parameter vector.
struct TensorSlot {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;  // 1 for vectors
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// Fixed tensor order: encoder.W, encoder.b, then
///   kDense:   head.W, head.b
///   kDecoder: decoder.W, decoder.b, proj.W, proj.b, static.W, static.b
std::vector<TensorSlot> param_layout(const NetworkArch& arch);
std::size_t param_count(const NetworkArch& arch);

/// Per-batch forward state for the backward pass.
struct ForwardCache {
  int batch = 0;
  LstmCache encoder;
  LstmCache decoder;
  std::vector<double> final_state;  // B x H, copy of f_S
};

class Network {
 public:
  explicit Network(NetworkArch arch);
  Network(NetworkArch arch, std::vector<double> params);

  const NetworkArch& arch() const { return arch_; }
  const std::vector<TensorSlot>& layout() const { return layout_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  const TensorSlot& slot(const std::string& name) const;
  std::span<const double> tensor(const std::string& name) const;
  std::span<double> tensor(const std::string& name);

  LstmView encoder_view() const;
  LstmView decoder_view() const;

  /// inputs: B samples, each S x input_dim time-major (the stored record
  /// layout). Fills cache.final_state (B x H).
  void encoder_forward(std::span<const double> inputs, int batch, ForwardCache& cache) const;
  /// Maps cache.final_state to predictions (B x M).
  void head_forward(ForwardCache& cache, std::span<double> pred) const;
  void forward(std::span<const double> inputs, int batch, std::span<double> pred,
               ForwardCache& cache) const;

  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(pred).
  void backward(const ForwardCache& cache, std::span<const double> dpred,
                std::span<double> grad) const;

  /// Mean over the batch of per-sample MSE; gradient of that mean is written
  /// (not accumulated) into grad.
  double loss_and_grad(std::span<const double> inputs, std::span<const double> targets,
                       int batch, std::span<double> grad, ForwardCache& cache) const;

  std::vector<double> predict(std::span<const double> input) const;
  /// Predictions for many samples, processed in chunks of `chunk`.
  std::vector<std::vector<double>> predict_all(const std::vector<dataset::Sample>& samples,
                                               int chunk = 256) const;

 private:
  NetworkArch arch_;
  std::vector<TensorSlot> layout_;
  std::vector<double> params_;
};

/// Glorot-uniform weights per gate/dense matrix, zero biases, forget-gate
/// biases set to 1.
std::vector<double> init_params(const NetworkArch& arch, std::uint64_t seed);

}  // namespace hamlearn::nn
