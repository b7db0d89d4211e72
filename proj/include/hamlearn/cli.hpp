#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hamlearn/experiments.hpp"

namespace hamlearn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad command line or configuration; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Every "section.key = value" entry of an INI file, in file order.
KeyValues read_config(const std::filesystem::path& path);

/// Applies every entry of an INI file on top of base. The [io] section is
/// reserved for file paths and is skipped here.
experiments::ExperimentSpec load_config(const std::filesystem::path& path,
                                        experiments::ExperimentSpec base);

/// Applies one "section.key=value" override.
void apply_override(experiments::ExperimentSpec& spec, const std::string& assignment);

/// Entry point behind the `hamlearn` executable. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hamlearn::cli
