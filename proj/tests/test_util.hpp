#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hamlearn::testing {

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Direct evaluation of one LSTM cell, one scalar at a time. W is 4H x (H+in)
// with gate blocks G, I, E, D acting on [f_prev, o].
struct RefCell {
  std::vector<double> f, c;
};

inline RefCell ref_cell(std::span<const double> w, std::span<const double> b, int hidden,
                        int input_dim, std::span<const double> o, std::span<const double> f_prev,
                        std::span<const double> c_prev) {
  const int k = hidden + input_dim;
  auto pre = [&](int gate, int r) {
    const int row = gate * hidden + r;
    double z = b[static_cast<std::size_t>(row)];
    for (int j = 0; j < hidden; ++j) z += w[static_cast<std::size_t>(row * k + j)] * f_prev[static_cast<std::size_t>(j)];
    for (int j = 0; j < input_dim; ++j) {
      z += w[static_cast<std::size_t>(row * k + hidden + j)] * o[static_cast<std::size_t>(j)];
    }
    return z;
  };
  RefCell out;
  for (int r = 0; r < hidden; ++r) {
    const double g = sigmoid_ref(pre(0, r));
    const double i = sigmoid_ref(pre(1, r));
    const double e = std::tanh(pre(2, r));
    const double d = sigmoid_ref(pre(3, r));
    const double c = g * c_prev[static_cast<std::size_t>(r)] + i * e;
    out.c.push_back(c);
    out.f.push_back(d * std::tanh(c));
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("hamlearn_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace hamlearn::testing
