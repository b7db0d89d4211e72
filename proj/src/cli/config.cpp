#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hamlearn/cli.hpp"

namespace hamlearn::cli {

KeyValues read_config(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  if (!std::filesystem::exists(path)) throw UsageError("config file " + path.string() + " not found");
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError("cannot read config " + path.string() + ": " + e.message());
  }
  KeyValues out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw UsageError(path.string() + ": key '" + section + "' must sit inside a [section]");
    }
    for (const auto& [key, value] : body) out.emplace_back(section + "." + key, value.data());
  }
  return out;
}

experiments::ExperimentSpec load_config(const std::filesystem::path& path,
                                        experiments::ExperimentSpec base) {
  for (const auto& [key, value] : read_config(path)) {
    if (key.rfind("io.", 0) == 0) continue;
    try {
      experiments::set_key(base, key, value);
    } catch (const std::invalid_argument& e) {
      throw UsageError(path.string() + ": " + e.what());
    }
  }
  return base;
}

void apply_override(experiments::ExperimentSpec& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' is not of the form section.key=value");
  }
  try {
    experiments::set_key(spec, assignment.substr(0, eq), assignment.substr(eq + 1));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

}  // namespace hamlearn::cli
