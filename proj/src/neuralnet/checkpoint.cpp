#include "hamlearn/neuralnet/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/textio.hpp"

namespace hamlearn::nn {

using nlohmann::json;

namespace {

json arch_to_json(const NetworkArch& a) {
  return json{{"input_dim", a.input_dim},         {"seq_len", a.seq_len},
              {"hidden", a.hidden},               {"head", head_name(a.head)},
              {"output_dim", a.output_dim},       {"decoder_steps", a.decoder_steps},
              {"step_outputs", a.step_outputs},   {"static_outputs", a.static_outputs}};
}

NetworkArch arch_from_json(const json& j) {
  NetworkArch a;
  a.input_dim = j.at("input_dim").get<int>();
  a.seq_len = j.at("seq_len").get<int>();
  a.hidden = j.at("hidden").get<int>();
  a.head = parse_head(j.at("head").get<std::string>());
  a.output_dim = j.at("output_dim").get<int>();
  a.decoder_steps = j.at("decoder_steps").get<int>();
  a.step_outputs = j.at("step_outputs").get<int>();
  a.static_outputs = j.at("static_outputs").get<int>();
  a.validate();
  return a;
}

void write_tensor(std::ostream& out, const std::string& name, std::span<const double> values) {
  std::string line = name + ' ' + std::to_string(values.size());
  if (!values.empty()) line.push_back(' ');
  textio::append_doubles(line, values);
  line.push_back('\n');
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
}

void read_tensor(std::istream& in, const std::string& name, std::span<double> dest,
                 const std::string& where) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(where + ": truncated before tensor " + name);
  }
  const auto sp1 = line.find(' ');
  const std::string got_name = line.substr(0, sp1);
  if (got_name != name) {
    throw FormatError(where + ": expected tensor " + name + ", found '" + got_name + "'");
  }
  std::vector<double> v;
  try {
    v = textio::parse_doubles(sp1 == std::string::npos ? std::string_view{}
                                                       : std::string_view(line).substr(sp1 + 1));
  } catch (const FormatError& e) {
    throw FormatError(where + ": tensor " + name + ": " + e.what());
  }
  if (v.empty() || v[0] != static_cast<double>(dest.size()) || v.size() != dest.size() + 1) {
    throw FormatError(where + ": tensor " + name + " should hold " + std::to_string(dest.size()) +
                      " values (corrupt or truncated)");
  }
  std::copy(v.begin() + 1, v.end(), dest.begin());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto layout = param_layout(ckpt.arch);
  if (ckpt.params.size() != param_count(ckpt.arch)) {
    throw ShapeError("checkpoint parameter count disagrees with its architecture");
  }
  json header{{"format", "hamlearn-checkpoint"},
              {"format_version", kCheckpointVersion},
              {"arch", arch_to_json(ckpt.arch)},
              {"seed", ckpt.seed},
              {"epoch", ckpt.epoch},
              {"n_params", ckpt.params.size()},
              {"tensors", json::array()}};
  for (const auto& s : layout) header["tensors"].push_back(s.name);
  if (ckpt.optimizer) {
    const auto& o = *ckpt.optimizer;
    if (o.m.size() != ckpt.params.size() || o.v.size() != ckpt.params.size()) {
      throw ShapeError("optimizer moments disagree with the parameter count");
    }
    header["optimizer"] = json{{"learning_rate", o.config.learning_rate},
                               {"beta1", o.config.beta1},
                               {"beta2", o.config.beta2},
                               {"epsilon", o.config.epsilon},
                               {"step", o.step}};
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << header.dump() << '\n';
  const std::span<const double> p(ckpt.params);
  for (const auto& s : layout) write_tensor(out, s.name, p.subspan(s.offset, s.size()));
  if (ckpt.optimizer) {
    const std::span<const double> m(ckpt.optimizer->m), v(ckpt.optimizer->v);
    for (const auto& s : layout) write_tensor(out, "adam.m." + s.name, m.subspan(s.offset, s.size()));
    for (const auto& s : layout) write_tensor(out, "adam.v." + s.name, v.subspan(s.offset, s.size()));
  }
  out << "end\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + where);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(where + ": empty checkpoint");
  Checkpoint ckpt;
  std::vector<TensorSlot> layout;
  try {
    const json header = json::parse(line);
    if (header.value("format", std::string()) != "hamlearn-checkpoint") {
      throw FormatError(where + ": not a hamlearn checkpoint");
    }
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw VersionError(where + ": checkpoint format_version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kCheckpointVersion) +
                         ")");
    }
    ckpt.arch = arch_from_json(header.at("arch"));
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.epoch = header.at("epoch").get<int>();
    layout = param_layout(ckpt.arch);
    if (header.at("n_params").get<std::size_t>() != param_count(ckpt.arch)) {
      throw FormatError(where + ": n_params disagrees with the architecture");
    }
    if (header.contains("optimizer")) {
      const auto& o = header.at("optimizer");
      AdamConfig cfg{o.at("learning_rate").get<double>(), o.at("beta1").get<double>(),
                     o.at("beta2").get<double>(), o.at("epsilon").get<double>()};
      ckpt.optimizer = AdamState(cfg, param_count(ckpt.arch));
      ckpt.optimizer->step = o.at("step").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw FormatError(where + ": unreadable checkpoint header: " + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(where + ": invalid architecture: " + e.what());
  }
  ckpt.params.assign(param_count(ckpt.arch), 0.0);
  std::span<double> p(ckpt.params);
  for (const auto& s : layout) read_tensor(in, s.name, p.subspan(s.offset, s.size()), where);
  if (ckpt.optimizer) {
    std::span<double> m(ckpt.optimizer->m), v(ckpt.optimizer->v);
    for (const auto& s : layout) read_tensor(in, "adam.m." + s.name, m.subspan(s.offset, s.size()), where);
    for (const auto& s : layout) read_tensor(in, "adam.v." + s.name, v.subspan(s.offset, s.size()), where);
  }
  if (!std::getline(in, line) || line != "end") throw FormatError(where + ": missing end marker");
  return ckpt;
}

}  // namespace hamlearn::nn
