#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "hamlearn/neuralnet/adam.hpp"
#include "hamlearn/neuralnet/network.hpp"

namespace hamlearn::nn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  NetworkArch arch;
  std::vector<double> params;
  std::uint64_t seed = 0;
  int epoch = 0;
  std::optional<AdamState> optimizer;
};

/// Header line (JSON) followed by one line per tensor in param_layout order,
/// then the Adam moments in the same order when present.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hamlearn::nn
