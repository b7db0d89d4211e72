#pragma once

// Batched LSTM recurrence with hand-derived backpropagation through time.
//
// Gate rows are stacked as [forget G; input I; candidate E; output D] in one
// 4H x (H + input_dim) row-major matrix acting on the concatenation
// [f_prev, o_s]:
//   G = sig(W_g x + b_g)   I = sig(W_i x + b_i)   E = tanh(W_e x + b_e)
//   c_s = G * c_prev + I * E
//   D = sig(W_d x + b_d)   f_s = D * tanh(c_s)

#include <span>
#include <vector>

namespace hamlearn::nn {

struct LstmView {
  int hidden = 0;
  int input_dim = 0;
  std::span<const double> weights;  // 4H x (H + input_dim)
  std::span<const double> bias;     // 4H

  int concat_dim() const { return hidden + input_dim; }
};

struct LstmGradView {
  std::span<double> weights;
  std::span<double> bias;
};

/// Owning single-cell parameters.
struct LstmCellParams {
  int hidden = 0;
  int input_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  LstmCellParams() = default;
  LstmCellParams(int hidden_, int input_dim_);
  LstmView view() const { return {hidden, input_dim, weights, bias}; }
};

/// Everything the backward pass needs from a forward sweep over `steps`
/// time steps of a batch. Buffers are time-major, then batch, then feature.
struct LstmCache {
  int batch = 0;
  int steps = 0;
  int hidden = 0;
  int input_dim = 0;
  std::vector<double> x;       // steps x B x (H + in): [h_prev, o_s]
  std::vector<double> gates;   // steps x B x 4H, activated
  std::vector<double> cell;    // (steps + 1) x B x H, cell[0] = c0
  std::vector<double> tanh_c;  // steps x B x H
  std::vector<double> h;       // (steps + 1) x B x H, h[0] = h0

  std::span<const double> hidden_at(int s) const;  // h after s steps
  std::span<const double> cell_at(int s) const;
};

/// Runs the recurrence. `inputs` is steps x B x input_dim (may be empty when
/// input_dim == 0). `h0`/`c0` are B x H, or empty for zeros.
void lstm_forward(const LstmView& p, std::span<const double> inputs, int batch, int steps,
                  std::span<const double> h0, std::span<const double> c0, LstmCache& cache);

/// Accumulates parameter gradients into `grad`. `dh_steps` (steps x B x H)
/// carries loss gradients w.r.t. each emitted hidden state and may be empty;
/// dh_last / dc_last seed the final state and may be empty. Writes the
/// gradients w.r.t. h0 and c0 into dh0 / dc0 (B x H each).
void lstm_backward(const LstmView& p, const LstmCache& cache, std::span<const double> dh_steps,
                   std::span<const double> dh_last, std::span<const double> dc_last,
                   const LstmGradView& grad, std::span<double> dh0, std::span<double> dc0);

struct CellResult {
  std::vector<double> f;      // H
  std::vector<double> c;      // H
  std::vector<double> gates;  // 4H activated: G, I, E, D
};

/// One cell step on a single sample.
CellResult lstm_cell_forward(std::span<const double> o, std::span<const double> f_prev,
                             std::span<const double> c_prev, const LstmView& p);

}  // namespace hamlearn::nn
