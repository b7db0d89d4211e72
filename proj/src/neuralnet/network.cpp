#include "hamlearn/neuralnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/kernels.hpp"
#include "hamlearn/neuralnet/metrics.hpp"

namespace hamlearn::nn {
namespace {

using std::size_t;
inline size_t sz(int v) { return static_cast<size_t>(v); }

// out[c x r] = in[r x c]^T
void transpose(const double* in, size_t r, size_t c, double* out) {
  for (size_t i = 0; i < r; ++i) {
    for (size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  }
}

// out (n x o) = bias + x (n x h) * W^T, W is o x h
void affine(const double* x, size_t n, size_t h, std::span<const double> w,
            std::span<const double> b, double* out) {
  const size_t o = b.size();
  if (o == 0) return;
  for (size_t r = 0; r < n; ++r) std::copy(b.begin(), b.end(), out + r * o);
  std::vector<double> wt(h * o);
  transpose(w.data(), o, h, wt.data());
  kernels::active().gemm_acc(n, o, h, x, h, wt.data(), o, out, o);
}

// Given dy (n x o) for y = x W^T + b: dW += dy^T x, db += colsum(dy),
// dx (n x h) += dy W.
void affine_backward(const double* x, size_t n, size_t h, std::span<const double> w,
                     const double* dy, std::span<double> dw, std::span<double> db, double* dx) {
  const size_t o = db.size();
  if (o == 0) return;
  const auto& kt = kernels::active();
  std::vector<double> dyt(o * n);
  transpose(dy, n, o, dyt.data());
  kt.gemm_acc(o, h, n, dyt.data(), n, x, h, dw.data(), h);
  for (size_t r = 0; r < n; ++r) {
    for (size_t j = 0; j < o; ++j) db[j] += dy[r * o + j];
  }
  if (dx) kt.gemm_acc(n, h, o, dy, o, w.data(), h, dx, h);
}

}  // namespace

std::size_t NetworkArch::target_length() const {
  if (head == HeadKind::kDense) return sz(output_dim);
  return sz(decoder_steps) * sz(step_outputs) + sz(static_outputs);
}

void NetworkArch::validate() const {
  if (input_dim < 1 || seq_len < 1 || hidden < 1) {
    throw ShapeError("network needs input_dim, seq_len and hidden >= 1");
  }
  if (head == HeadKind::kDense && output_dim < 1) throw ShapeError("dense head needs outputs");
  if (head == HeadKind::kDecoder && (decoder_steps < 1 || step_outputs < 1 || static_outputs < 0)) {
    throw ShapeError("decoder head needs decoder_steps >= 1 and step_outputs >= 1");
  }
}

NetworkArch NetworkArch::for_dataset(const dataset::DatasetMeta& meta, int hidden) {
  NetworkArch a;
  a.input_dim = 3 * meta.n_qubits;
  a.seq_len = meta.grid.n_points;
  a.hidden = hidden;
  if (meta.family == qsim::Family::kXyChainTdZField) {
    a.head = HeadKind::kDecoder;
    a.output_dim = static_cast<int>(meta.target_length());
    a.decoder_steps = meta.grid.n_points;
    a.step_outputs = meta.n_qubits;
    a.static_outputs = meta.n_qubits - 1;
  } else {
    a.head = HeadKind::kDense;
    a.output_dim = static_cast<int>(meta.target_length());
  }
  a.validate();
  return a;
}

std::string head_name(HeadKind k) { return k == HeadKind::kDense ? "dense" : "decoder"; }

HeadKind parse_head(const std::string& name) {
  if (name == "dense") return HeadKind::kDense;
  if (name == "decoder") return HeadKind::kDecoder;
  throw FormatError("unknown head kind '" + name + "'");
}

std::vector<TensorSlot> param_layout(const NetworkArch& arch) {
  arch.validate();
  std::vector<TensorSlot> out;
  size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    out.push_back(TensorSlot{std::move(name), offset, rows, cols});
    offset += sz(rows) * sz(cols);
  };
  const int h = arch.hidden;
  add("encoder.W", 4 * h, h + arch.input_dim);
  add("encoder.b", 4 * h, 1);
  if (arch.head == HeadKind::kDense) {
    add("head.W", arch.output_dim, h);
    add("head.b", arch.output_dim, 1);
  } else {
    add("decoder.W", 4 * h, h);
    add("decoder.b", 4 * h, 1);
    add("proj.W", arch.step_outputs, h);
    add("proj.b", arch.step_outputs, 1);
    add("static.W", arch.static_outputs, h);
    add("static.b", arch.static_outputs, 1);
  }
  return out;
}

std::size_t param_count(const NetworkArch& arch) {
  const auto layout = param_layout(arch);
  return layout.back().offset + layout.back().size();
}

std::vector<double> init_params(const NetworkArch& arch, std::uint64_t seed) {
  const auto layout = param_layout(arch);
  std::vector<double> p(layout.back().offset + layout.back().size(), 0.0);
  std::mt19937_64 rng(seed);
  const int h = arch.hidden;
  auto glorot = [&](size_t offset, size_t count, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (size_t k = 0; k < count; ++k) p[offset + k] = dist(rng);
  };
  for (const auto& s : layout) {
    if (s.cols == 1) continue;  // biases
    const bool recurrent = s.name == "encoder.W" || s.name == "decoder.W";
    if (recurrent) {
      // four gate matrices, each hidden x (hidden + input)
      const size_t per_gate = sz(h) * sz(s.cols);
      for (size_t g = 0; g < 4; ++g) glorot(s.offset + g * per_gate, per_gate, s.cols, h);
    } else {
      glorot(s.offset, s.size(), s.cols, s.rows);
    }
  }
  for (const auto& s : layout) {
    if (s.name == "encoder.b" || s.name == "decoder.b") {
      std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(s.offset), h, 1.0);  // forget gate
    }
  }
  return p;
}

Network::Network(NetworkArch arch) : Network(arch, std::vector<double>(param_count(arch), 0.0)) {}

Network::Network(NetworkArch arch, std::vector<double> params)
    : arch_(arch), layout_(param_layout(arch)), params_(std::move(params)) {
  if (params_.size() != param_count(arch_)) {
    throw ShapeError("network expects " + std::to_string(param_count(arch_)) +
                     " parameters, got " + std::to_string(params_.size()));
  }
}

const TensorSlot& Network::slot(const std::string& name) const {
  for (const auto& s : layout_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no tensor named " + name);
}

std::span<const double> Network::tensor(const std::string& name) const {
  const auto& s = slot(name);
  return std::span<const double>(params_).subspan(s.offset, s.size());
}

std::span<double> Network::tensor(const std::string& name) {
  const auto& s = slot(name);
  return std::span<double>(params_).subspan(s.offset, s.size());
}

LstmView Network::encoder_view() const {
  return LstmView{arch_.hidden, arch_.input_dim, tensor("encoder.W"), tensor("encoder.b")};
}

LstmView Network::decoder_view() const {
  if (arch_.head != HeadKind::kDecoder) throw std::logic_error("network has no decoder");
  return LstmView{arch_.hidden, 0, tensor("decoder.W"), tensor("decoder.b")};
}

void Network::encoder_forward(std::span<const double> inputs, int batch,
                              ForwardCache& cache) const {
  const size_t B = sz(batch), S = sz(arch_.seq_len), in = sz(arch_.input_dim);
  if (batch < 1 || inputs.size() != B * S * in) {
    throw ShapeError("batch of " + std::to_string(batch) + " records needs " +
                     std::to_string(B * S * in) + " input values (S=" +
                     std::to_string(arch_.seq_len) + ", 3N=" + std::to_string(arch_.input_dim) +
                     "), got " + std::to_string(inputs.size()));
  }
  // sample-major (b, s, k) -> time-major (s, b, k)
  std::vector<double> tm(inputs.size());
  for (size_t b = 0; b < B; ++b) {
    for (size_t s = 0; s < S; ++s) {
      std::copy_n(inputs.data() + (b * S + s) * in, in, tm.data() + (s * B + b) * in);
    }
  }
  cache.batch = batch;
  lstm_forward(encoder_view(), tm, batch, arch_.seq_len, {}, {}, cache.encoder);
  const auto fs = cache.encoder.hidden_at(arch_.seq_len);
  cache.final_state.assign(fs.begin(), fs.end());
}

void Network::head_forward(ForwardCache& cache, std::span<double> pred) const {
  const size_t B = sz(cache.batch), H = sz(arch_.hidden), M = arch_.target_length();
  if (cache.final_state.size() != B * H) throw ShapeError("final state must be batch x hidden");
  if (pred.size() != B * M) throw ShapeError("prediction buffer must be batch x M");
  if (arch_.head == HeadKind::kDense) {
    affine(cache.final_state.data(), B, H, tensor("head.W"), tensor("head.b"), pred.data());
    return;
  }
  const size_t T = sz(arch_.decoder_steps), N = sz(arch_.step_outputs),
               C = sz(arch_.static_outputs);
  lstm_forward(decoder_view(), {}, cache.batch, arch_.decoder_steps, cache.final_state,
               cache.final_state, cache.decoder);
  // h_1..h_T are contiguous (T x B x H) after h_0
  std::vector<double> steps_out(T * B * N);
  const double* h_all = cache.decoder.h.data() + B * H;
  affine(h_all, T * B, H, tensor("proj.W"), tensor("proj.b"), steps_out.data());
  std::vector<double> stat(B * C);
  affine(cache.final_state.data(), B, H, tensor("static.W"), tensor("static.b"), stat.data());
  for (size_t b = 0; b < B; ++b) {
    double* row = pred.data() + b * M;
    for (size_t t = 0; t < T; ++t) std::copy_n(steps_out.data() + (t * B + b) * N, N, row + t * N);
    std::copy_n(stat.data() + b * C, C, row + T * N);
  }
}

void Network::forward(std::span<const double> inputs, int batch, std::span<double> pred,
                      ForwardCache& cache) const {
  encoder_forward(inputs, batch, cache);
  head_forward(cache, pred);
}

void Network::backward(const ForwardCache& cache, std::span<const double> dpred,
                       std::span<double> grad) const {
  const size_t B = sz(cache.batch), H = sz(arch_.hidden), M = arch_.target_length();
  if (cache.encoder.steps != arch_.seq_len || cache.final_state.size() != B * H) {
    throw std::logic_error("backward called without a matching forward cache");
  }
  if (dpred.size() != B * M) throw ShapeError("dpred must be batch x M");
  if (grad.size() != params_.size()) throw ShapeError("gradient buffer has the wrong size");
  auto g = [&](const std::string& name) {
    const auto& s = slot(name);
    return grad.subspan(s.offset, s.size());
  };

  std::vector<double> dfinal(B * H, 0.0);
  if (arch_.head == HeadKind::kDense) {
    affine_backward(cache.final_state.data(), B, H, tensor("head.W"), dpred.data(), g("head.W"),
                    g("head.b"), dfinal.data());
  } else {
    if (cache.decoder.steps != arch_.decoder_steps) {
      throw std::logic_error("backward called without a decoder cache");
    }
    const size_t T = sz(arch_.decoder_steps), N = sz(arch_.step_outputs),
                 C = sz(arch_.static_outputs);
    std::vector<double> dsteps(T * B * N), dstat(B * C);
    for (size_t b = 0; b < B; ++b) {
      const double* row = dpred.data() + b * M;
      for (size_t t = 0; t < T; ++t) std::copy_n(row + t * N, N, dsteps.data() + (t * B + b) * N);
      std::copy_n(row + T * N, C, dstat.data() + b * C);
    }
    std::vector<double> dh_steps(T * B * H, 0.0);
    const double* h_all = cache.decoder.h.data() + B * H;
    affine_backward(h_all, T * B, H, tensor("proj.W"), dsteps.data(), g("proj.W"), g("proj.b"),
                    dh_steps.data());
    affine_backward(cache.final_state.data(), B, H, tensor("static.W"), dstat.data(),
                    g("static.W"), g("static.b"), dfinal.data());
    std::vector<double> dh0(B * H), dc0(B * H);
    lstm_backward(decoder_view(), cache.decoder, dh_steps, {}, {},
                  LstmGradView{g("decoder.W"), g("decoder.b")}, dh0, dc0);
    // decoder starts from h0 = c0 = f_S
    for (size_t k = 0; k < B * H; ++k) dfinal[k] += dh0[k] + dc0[k];
  }
  std::vector<double> dh0(B * H), dc0(B * H);
  lstm_backward(encoder_view(), cache.encoder, {}, dfinal, {},
                LstmGradView{g("encoder.W"), g("encoder.b")}, dh0, dc0);
}

double Network::loss_and_grad(std::span<const double> inputs, std::span<const double> targets,
                              int batch, std::span<double> grad, ForwardCache& cache) const {
  const size_t B = sz(batch), M = arch_.target_length();
  if (targets.size() != B * M) {
    throw ShapeError("targets have " + std::to_string(targets.size()) + " values, expected " +
                     std::to_string(B * M));
  }
  std::vector<double> pred(B * M);
  forward(inputs, batch, pred, cache);
  double loss = 0.0;
  std::vector<double> dpred(B * M);
  const double scale = 2.0 / (static_cast<double>(M) * static_cast<double>(B));
  for (size_t b = 0; b < B; ++b) {
    loss += mse_loss(std::span<const double>(pred).subspan(b * M, M), targets.subspan(b * M, M));
    for (size_t m = 0; m < M; ++m) dpred[b * M + m] = scale * (pred[b * M + m] - targets[b * M + m]);
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  backward(cache, dpred, grad);
  return loss / static_cast<double>(B);
}

std::vector<double> Network::predict(std::span<const double> input) const {
  ForwardCache cache;
  std::vector<double> pred(arch_.target_length());
  forward(input, 1, pred, cache);
  return pred;
}

std::vector<std::vector<double>> Network::predict_all(const std::vector<dataset::Sample>& samples,
                                                      int chunk) const {
  const size_t M = arch_.target_length();
  const size_t per = sz(arch_.seq_len) * sz(arch_.input_dim);
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  ForwardCache cache;
  std::vector<double> in, pred;
  for (size_t start = 0; start < samples.size(); start += sz(chunk)) {
    const size_t n = std::min(sz(chunk), samples.size() - start);
    in.resize(n * per);
    for (size_t k = 0; k < n; ++k) {
      const auto& x = samples[start + k].input;
      if (x.size() != per) {
        throw ShapeError("sample input has " + std::to_string(x.size()) +
                         " values, network expects " + std::to_string(per));
      }
      std::copy(x.begin(), x.end(), in.begin() + static_cast<std::ptrdiff_t>(k * per));
    }
    pred.resize(n * M);
    forward(in, static_cast<int>(n), pred, cache);
    for (size_t k = 0; k < n; ++k) out.emplace_back(pred.begin() + static_cast<std::ptrdiff_t>(k * M),
                                                    pred.begin() + static_cast<std::ptrdiff_t>((k + 1) * M));
  }
  return out;
}

}  // namespace hamlearn::nn
