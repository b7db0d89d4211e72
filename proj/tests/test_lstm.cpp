#include <gtest/gtest.h>

#include <vector>

#include "hamlearn/errors.hpp"
#include "hamlearn/kernels.hpp"
#include "hamlearn/neuralnet/lstm.hpp"
#include "test_util.hpp"

namespace hamlearn::nn {
namespace {

using testing::random_vector;
using testing::ref_cell;

TEST(LstmCell, ZeroParametersAndInputs) {
  LstmCellParams p(3, 2);
  const std::vector<double> o(2, 0.0), f(3, 0.0), c(3, 0.0);
  const auto r = lstm_cell_forward(o, f, c, p.view());
  for (int j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(r.gates[j], 0.5);          // G
    EXPECT_DOUBLE_EQ(r.gates[3 + j], 0.5);      // I
    EXPECT_DOUBLE_EQ(r.gates[6 + j], 0.0);      // E
    EXPECT_DOUBLE_EQ(r.gates[9 + j], 0.5);      // D
    EXPECT_DOUBLE_EQ(r.c[j], 0.0);
    EXPECT_DOUBLE_EQ(r.f[j], 0.0);
  }
}

TEST(LstmCell, ZeroPreviousCellIgnoresForgetGate) {
  LstmCellParams p(3, 2);
  p.weights = random_vector(p.weights.size(), -1, 1, 5);
  p.bias = random_vector(p.bias.size(), -1, 1, 6);
  const auto o = random_vector(2, -1, 1, 7);
  const auto f = random_vector(3, -1, 1, 8);
  const std::vector<double> c0(3, 0.0);
  const auto a = lstm_cell_forward(o, f, c0, p.view());
  // scramble the forget-gate rows
  for (std::size_t k = 0; k < 3 * 5; ++k) p.weights[k] = -3.0 * p.weights[k] + 0.1;
  const auto b = lstm_cell_forward(o, f, c0, p.view());
  for (int j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(a.c[j], a.gates[3 + j] * a.gates[6 + j]);
    EXPECT_DOUBLE_EQ(a.c[j], b.c[j]);
  }
}

TEST(LstmCell, HandSetTwoUnitCell) {
  LstmCellParams p(2, 1);
  p.weights = {0.1,  -0.2, 0.3,  0.4,   0.5,   -0.6,  -0.7, 0.8,
               0.9,  0.15, -0.25, 0.35, 0.45,  -0.55, 0.65, -0.75,
               0.85, -0.95, 0.05, 0.12, -0.18, 0.22,  -0.33, 0.44};
  p.bias = {1.0, 1.0, 0.1, -0.1, 0.2, -0.2, 0.0, 0.3};
  const std::vector<double> o{0.7}, f{0.2, -0.4}, c{0.5, -0.3};
  const auto r = lstm_cell_forward(o, f, c, p.view());
  const auto ref = ref_cell(p.weights, p.bias, 2, 1, o, f, c);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(r.c[j], ref.c[j], 1e-15);
    EXPECT_NEAR(r.f[j], ref.f[j], 1e-15);
  }
  // reference values computed offline in extended precision
  EXPECT_NEAR(r.c[0], 0.817090773529142, 1e-14);
  EXPECT_NEAR(r.c[1], -0.681313984268939, 1e-14);
  EXPECT_NEAR(r.f[0], 0.30919057094759833, 1e-14);
  EXPECT_NEAR(r.f[1], -0.40668865806944976, 1e-14);
}

TEST(LstmCell, ShapeMismatchThrows) {
  LstmCellParams p(2, 1);
  const std::vector<double> o{0.1, 0.2}, f(2, 0.0), c(2, 0.0);
  EXPECT_THROW(lstm_cell_forward(o, f, c, p.view()), ShapeError);
  LstmView bad = p.view();
  bad.bias = bad.bias.first(3);
  EXPECT_THROW(lstm_cell_forward(std::vector<double>{0.1}, f, c, bad), ShapeError);
}

TEST(LstmSequence, BatchedForwardMatchesPerSampleReference) {
  const int H = 5, in = 3, B = 4, S = 6;
  LstmCellParams p(H, in);
  p.weights = random_vector(p.weights.size(), -0.8, 0.8, 21);
  p.bias = random_vector(p.bias.size(), -0.5, 0.5, 22);
  const auto inputs = random_vector(static_cast<std::size_t>(S * B * in), -1, 1, 23);
  const auto h0 = random_vector(static_cast<std::size_t>(B * H), -1, 1, 24);
  const auto c0 = random_vector(static_cast<std::size_t>(B * H), -1, 1, 25);
  LstmCache cache;
  lstm_forward(p.view(), inputs, B, S, h0, c0, cache);
  for (int b = 0; b < B; ++b) {
    std::vector<double> f(h0.begin() + b * H, h0.begin() + (b + 1) * H);
    std::vector<double> c(c0.begin() + b * H, c0.begin() + (b + 1) * H);
    for (int s = 0; s < S; ++s) {
      std::span<const double> o(inputs.data() + (s * B + b) * in, in);
      auto r = ref_cell(p.weights, p.bias, H, in, o, f, c);
      f = r.f;
      c = r.c;
      const auto got = cache.hidden_at(s + 1);
      for (int j = 0; j < H; ++j) EXPECT_NEAR(got[b * H + j], f[j], 1e-14);
    }
  }
}

TEST(LstmSequence, BackendsAgreeOnForwardAndBackward) {
  if (!kernels::backend_supported(kernels::Backend::kAvx2)) GTEST_SKIP() << "no AVX2";
  const int H = 12, in = 6, B = 9, S = 7;
  LstmCellParams p(H, in);
  p.weights = random_vector(p.weights.size(), -0.5, 0.5, 31);
  p.bias = random_vector(p.bias.size(), -0.5, 0.5, 32);
  const auto inputs = random_vector(static_cast<std::size_t>(S * B * in), -1, 1, 33);
  const auto dh_steps = random_vector(static_cast<std::size_t>(S * B * H), -1, 1, 34);

  auto run = [&](kernels::Backend be) {
    kernels::set_backend(be);
    LstmCache cache;
    lstm_forward(p.view(), inputs, B, S, {}, {}, cache);
    std::vector<double> gw(p.weights.size(), 0.0), gb(p.bias.size(), 0.0);
    std::vector<double> dh0(static_cast<std::size_t>(B * H)), dc0(dh0.size());
    lstm_backward(p.view(), cache, dh_steps, {}, {}, LstmGradView{gw, gb}, dh0, dc0);
    return std::tuple{cache.h, gw, gb, dh0};
  };
  const auto before = kernels::active_backend();
  const auto [h_s, gw_s, gb_s, dh_s] = run(kernels::Backend::kScalar);
  const auto [h_v, gw_v, gb_v, dh_v] = run(kernels::Backend::kAvx2);
  kernels::set_backend(before);
  for (std::size_t k = 0; k < h_s.size(); ++k) EXPECT_NEAR(h_s[k], h_v[k], 1e-13);
  for (std::size_t k = 0; k < gw_s.size(); ++k) EXPECT_NEAR(gw_s[k], gw_v[k], 1e-12);
  for (std::size_t k = 0; k < gb_s.size(); ++k) EXPECT_NEAR(gb_s[k], gb_v[k], 1e-12);
  for (std::size_t k = 0; k < dh_s.size(); ++k) EXPECT_NEAR(dh_s[k], dh_v[k], 1e-12);
}

TEST(LstmSequence, BackwardWithoutCacheThrows) {
  LstmCellParams p(2, 1);
  LstmCache empty;
  std::vector<double> gw(p.weights.size()), gb(p.bias.size()), dh0(2), dc0(2);
  EXPECT_THROW(lstm_backward(p.view(), empty, {}, {}, {}, LstmGradView{gw, gb}, dh0, dc0),
               ShapeError);
}

}  // namespace
}  // namespace hamlearn::nn
