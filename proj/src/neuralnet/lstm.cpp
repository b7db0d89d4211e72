#include "hamlearn/neuralnet/lstm.hpp"

#include <algorithm>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/kernels.hpp"

namespace hamlearn::nn {
namespace {

using std::size_t;

inline size_t sz(int v) { return static_cast<size_t>(v); }

void check_view(const LstmView& p) {
  if (p.hidden < 1 || p.input_dim < 0) throw ShapeError("LSTM needs hidden >= 1, input_dim >= 0");
  const size_t h4 = 4 * sz(p.hidden);
  if (p.weights.size() != h4 * sz(p.concat_dim()) || p.bias.size() != h4) {
    throw ShapeError("LSTM parameter shapes disagree with hidden=" + std::to_string(p.hidden) +
                     ", input_dim=" + std::to_string(p.input_dim));
  }
}

// out[c x r] = in[r x c]^T
void transpose(const double* in, size_t r, size_t c, double* out, size_t ld_out) {
  for (size_t i = 0; i < r; ++i) {
    for (size_t j = 0; j < c; ++j) out[j * ld_out + i] = in[i * c + j];
  }
}

}  // namespace

LstmCellParams::LstmCellParams(int hidden_, int input_dim_)
    : hidden(hidden_),
      input_dim(input_dim_),
      weights(4 * sz(hidden_) * sz(hidden_ + input_dim_), 0.0),
      bias(4 * sz(hidden_), 0.0) {}

std::span<const double> LstmCache::hidden_at(int s) const {
  const size_t n = sz(batch) * sz(hidden);
  return std::span<const double>(h).subspan(sz(s) * n, n);
}

std::span<const double> LstmCache::cell_at(int s) const {
  const size_t n = sz(batch) * sz(hidden);
  return std::span<const double>(cell).subspan(sz(s) * n, n);
}

void lstm_forward(const LstmView& p, std::span<const double> inputs, int batch, int steps,
                  std::span<const double> h0, std::span<const double> c0, LstmCache& cache) {
  check_view(p);
  if (batch < 1 || steps < 1) throw ShapeError("LSTM forward needs batch >= 1 and steps >= 1");
  const size_t H = sz(p.hidden), in = sz(p.input_dim), K = H + in, G4 = 4 * H;
  const size_t B = sz(batch), S = sz(steps);
  if (inputs.size() != S * B * in) {
    throw ShapeError("LSTM inputs have " + std::to_string(inputs.size()) + " values, expected " +
                     std::to_string(S * B * in));
  }
  if ((!h0.empty() && h0.size() != B * H) || (!c0.empty() && c0.size() != B * H)) {
    throw ShapeError("LSTM initial state must be batch x hidden");
  }

  cache.batch = batch;
  cache.steps = steps;
  cache.hidden = p.hidden;
  cache.input_dim = p.input_dim;
  cache.x.resize(S * B * K);
  cache.gates.resize(S * B * G4);
  cache.cell.resize((S + 1) * B * H);
  cache.tanh_c.resize(S * B * H);
  cache.h.resize((S + 1) * B * H);

  if (h0.empty()) {
    std::fill_n(cache.h.begin(), B * H, 0.0);
  } else {
    std::copy(h0.begin(), h0.end(), cache.h.begin());
  }
  if (c0.empty()) {
    std::fill_n(cache.cell.begin(), B * H, 0.0);
  } else {
    std::copy(c0.begin(), c0.end(), cache.cell.begin());
  }

  std::vector<double> wt(K * G4);
  transpose(p.weights.data(), G4, K, wt.data(), G4);

  const auto& kt = kernels::active();
  for (size_t s = 0; s < S; ++s) {
    double* x = cache.x.data() + s * B * K;
    const double* h_prev = cache.h.data() + s * B * H;
    const double* c_prev = cache.cell.data() + s * B * H;
    for (size_t b = 0; b < B; ++b) {
      std::copy_n(h_prev + b * H, H, x + b * K);
      if (in) std::copy_n(inputs.data() + (s * B + b) * in, in, x + b * K + H);
    }
    double* z = cache.gates.data() + s * B * G4;
    for (size_t b = 0; b < B; ++b) std::copy(p.bias.begin(), p.bias.end(), z + b * G4);
    kt.gemm_acc(B, G4, K, x, K, wt.data(), G4, z, G4);

    double* c = cache.cell.data() + (s + 1) * B * H;
    double* tc = cache.tanh_c.data() + s * B * H;
    double* h = cache.h.data() + (s + 1) * B * H;
    for (size_t b = 0; b < B; ++b) {
      double* zr = z + b * G4;
      kt.sigmoid(zr, zr, 2 * H);
      kt.tanh(zr + 2 * H, zr + 2 * H, H);
      kt.sigmoid(zr + 3 * H, zr + 3 * H, H);
      const double* gf = zr;
      const double* gi = zr + H;
      const double* ge = zr + 2 * H;
      double* cr = c + b * H;
      const double* cp = c_prev + b * H;
      for (size_t j = 0; j < H; ++j) cr[j] = gf[j] * cp[j] + gi[j] * ge[j];
    }
    kt.tanh(c, tc, B * H);
    for (size_t b = 0; b < B; ++b) {
      const double* gd = z + b * G4 + 3 * H;
      for (size_t j = 0; j < H; ++j) h[b * H + j] = gd[j] * tc[b * H + j];
    }
  }
}

void lstm_backward(const LstmView& p, const LstmCache& cache, std::span<const double> dh_steps,
                   std::span<const double> dh_last, std::span<const double> dc_last,
                   const LstmGradView& grad, std::span<double> dh0, std::span<double> dc0) {
  check_view(p);
  if (cache.steps < 1 || cache.hidden != p.hidden || cache.input_dim != p.input_dim) {
    throw ShapeError("LSTM cache is missing or does not match the parameters");
  }
  const size_t H = sz(p.hidden), K = sz(p.concat_dim()), G4 = 4 * H;
  const size_t B = sz(cache.batch), S = sz(cache.steps);
  if (!dh_steps.empty() && dh_steps.size() != S * B * H) {
    throw ShapeError("per-step hidden gradients must be steps x batch x hidden");
  }
  if ((!dh_last.empty() && dh_last.size() != B * H) ||
      (!dc_last.empty() && dc_last.size() != B * H) || dh0.size() != B * H ||
      dc0.size() != B * H) {
    throw ShapeError("LSTM state gradients must be batch x hidden");
  }
  if (grad.weights.size() != G4 * K || grad.bias.size() != G4) {
    throw ShapeError("LSTM gradient buffers have the wrong shape");
  }

  std::vector<double> dh(B * H, 0.0), dc(B * H, 0.0);
  if (!dh_last.empty()) std::copy(dh_last.begin(), dh_last.end(), dh.begin());
  if (!dc_last.empty()) std::copy(dc_last.begin(), dc_last.end(), dc.begin());

  std::vector<double> dz(B * G4), dx(B * K);
  // dz for all steps, transposed to 4H x (S B), so dW is one product at the end.
  std::vector<double> dzt_all(G4 * S * B);
  const auto& kt = kernels::active();

  for (size_t si = S; si-- > 0;) {
    if (!dh_steps.empty()) {
      const double* add = dh_steps.data() + si * B * H;
      for (size_t k = 0; k < B * H; ++k) dh[k] += add[k];
    }
    const double* gates = cache.gates.data() + si * B * G4;
    const double* c_prev = cache.cell.data() + si * B * H;
    const double* tc = cache.tanh_c.data() + si * B * H;
    for (size_t b = 0; b < B; ++b) {
      const double* gr = gates + b * G4;
      double* dzr = dz.data() + b * G4;
      for (size_t j = 0; j < H; ++j) {
        const size_t k = b * H + j;
        const double g = gr[j], i = gr[H + j], e = gr[2 * H + j], d = gr[3 * H + j];
        const double t = tc[k];
        const double dcs = dc[k] + dh[k] * d * (1.0 - t * t);
        dzr[j] = dcs * c_prev[k] * g * (1.0 - g);
        dzr[H + j] = dcs * e * i * (1.0 - i);
        dzr[2 * H + j] = dcs * i * (1.0 - e * e);
        dzr[3 * H + j] = dh[k] * t * d * (1.0 - d);
        dc[k] = dcs * g;
      }
    }
    for (size_t b = 0; b < B; ++b) {
      const double* dzr = dz.data() + b * G4;
      for (size_t r = 0; r < G4; ++r) {
        grad.bias[r] += dzr[r];
        dzt_all[r * S * B + si * B + b] = dzr[r];
      }
    }
    std::fill(dx.begin(), dx.end(), 0.0);
    kt.gemm_acc(B, K, G4, dz.data(), G4, p.weights.data(), K, dx.data(), K);
    for (size_t b = 0; b < B; ++b) std::copy_n(dx.data() + b * K, H, dh.data() + b * H);
  }
  kt.gemm_acc(G4, K, S * B, dzt_all.data(), S * B, cache.x.data(), K, grad.weights.data(), K);
  std::copy(dh.begin(), dh.end(), dh0.begin());
  std::copy(dc.begin(), dc.end(), dc0.begin());
}

CellResult lstm_cell_forward(std::span<const double> o, std::span<const double> f_prev,
                             std::span<const double> c_prev, const LstmView& p) {
  check_view(p);
  if (o.size() != sz(p.input_dim) || f_prev.size() != sz(p.hidden) ||
      c_prev.size() != sz(p.hidden)) {
    throw ShapeError("cell inputs must have sizes input_dim=" + std::to_string(p.input_dim) +
                     " and hidden=" + std::to_string(p.hidden));
  }
  LstmCache cache;
  lstm_forward(p, o, 1, 1, f_prev, c_prev, cache);
  const auto f = cache.hidden_at(1);
  const auto c = cache.cell_at(1);
  return CellResult{{f.begin(), f.end()}, {c.begin(), c.end()}, cache.gates};
}

}  // namespace hamlearn::nn
