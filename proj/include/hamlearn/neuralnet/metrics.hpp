#pragma once

#include <span>

namespace hamlearn::nn {

/// (1/M) sum (target - pred)^2
double mse_loss(std::span<const double> pred, std::span<const double> target);

/// pred . target / (|pred| |target|); throws UndefinedSimilarityError when
/// either norm is below 1e-12.
double cosine_similarity(std::span<const double> pred, std::span<const double> target);

}  // namespace hamlearn::nn
