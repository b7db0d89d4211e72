#include "hamlearn/neuralnet/metrics.hpp"

#include <cmath>
#include <string>

#include "hamlearn/errors.hpp"

namespace hamlearn::nn {

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ShapeError("mse_loss: lengths " + std::to_string(pred.size()) + " and " +
                     std::to_string(target.size()) + " must match and be non-zero");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < pred.size(); ++m) {
    const double d = target[m] - pred[m];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

double cosine_similarity(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError("cosine_similarity: lengths " + std::to_string(pred.size()) + " and " +
                     std::to_string(target.size()) + " differ");
  }
  double dot = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t m = 0; m < pred.size(); ++m) {
    dot += pred[m] * target[m];
    pp += pred[m] * pred[m];
    tt += target[m] * target[m];
  }
  const double np = std::sqrt(pp), nt = std::sqrt(tt);
  if (np < 1e-12 || nt < 1e-12) {
    throw UndefinedSimilarityError("cosine similarity undefined for a zero-norm vector");
  }
  return dot / (np * nt);
}

}  // namespace hamlearn::nn
