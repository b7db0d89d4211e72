#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hamlearn/errors.hpp"
#include "hamlearn/experiments.hpp"

namespace hamlearn::experiments {
namespace {

using std::numbers::pi;

std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

template <class T>
std::string fmt_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_num(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw std::invalid_argument("bad value '" + raw + "' for " + key);
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  if (trim(raw).empty()) return out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_num<T>(key, item));
  return out;
}


// Shared defaults for desk-tier single runs.
ExperimentSpec desk_base(qsim::Family f, int n, int steps) {
  ExperimentSpec s;
  s.tier = Tier::kDesk;
  s.data.family = f;
  s.data.n_qubits = n;
  s.data.grid = {record::kReferenceTau, steps};
  s.data.n_samples = 20000;
  s.test_samples = 1000;
  s.hidden = 64;
  s.train.batch_size = 64;
  s.train.epochs = 20;
  s.train.adam.learning_rate = 2e-3;
  s.train.lr_decay = 0.85;
  return s;
}

ExperimentSpec paper_base(qsim::Family f, int n, int steps, std::size_t train) {
  ExperimentSpec s;
  s.tier = Tier::kPaper;
  s.data.family = f;
  s.data.n_qubits = n;
  s.data.grid = {record::kReferenceTau, steps};
  s.data.n_samples = train;
  s.test_samples = 5000;
  s.hidden = nn::kDefaultHidden;
  // TrainConfig defaults: batch 256, 200 epochs, lr 1e-3, patience 20
  return s;
}

ExperimentSpec build(const std::string& name, Tier tier) {
  using qsim::Family;
  const bool desk = tier == Tier::kDesk;
  ExperimentSpec s;
  if (name == "ising1_2q" && desk) {
    s = desk_base(Family::kXyChainZField, 2, 25);
    s.description = "XY chain in a static z field, 2 qubits, S=25";
  } else if (name == "ising1_3q" && desk) {
    s = desk_base(Family::kXyChainZField, 3, 25);
    s.description = "XY chain in a static z field, 3 qubits, S=25";
  } else if (name == "ising1_7q" && !desk) {
    s = paper_base(Family::kXyChainZField, 7, 25, 100000);
    s.description = "XY chain in a static z field, 7 qubits, S=25, 100k samples";
  } else if (name == "ising2_3q" && desk) {
    s = desk_base(Family::kXyzChain, 3, 50);
    s.description = "XYZ chain in a static z field, 3 qubits, S=50";
  } else if (name == "ising2_6q" && !desk) {
    s = paper_base(Family::kXyzChain, 6, 75, 200000);
    s.description = "XYZ chain in a static z field, 6 qubits, S=75, 200k samples";
  } else if (name == "timedep_3q") {
    if (desk) {
      s = desk_base(Family::kXyChainTdZField, 1, 100);
      s.data.fourier_terms = 3;
      s.hidden = 32;
      s.train.epochs = 10;
      s.train.adam.learning_rate = 1e-3;
      s.train.lr_decay = 0.9;
      s.description = "time-dependent z field, 1 qubit, W=3, S=100 (desk stand-in)";
    } else {
      s = paper_base(Family::kXyChainTdZField, 3, 300, 100000);
      s.data.fourier_terms = dataset::kDefaultFourierTerms;
      s.train.grad_clip = 5.0;
      s.description = "XY chain in a time-dependent z field, 3 qubits, W=10, S=300";
    }
  } else if (name == "noise") {
    s = desk ? desk_base(Family::kXyChainZField, 3, 25)
             : paper_base(Family::kXyChainZField, 3, 25, 100000);
    s.kind = Kind::kNoise;
    if (desk) {
      s.test_samples = 500;
      s.train.epochs = 15;
    }
    s.description = "Gaussian-noise robustness: noiseless vs noise-trained models, S=25/50";
  } else if (name == "decoherence") {
    s = desk ? desk_base(Family::kXyChainZField, 3, 50)
             : paper_base(Family::kXyChainZField, 3, 150, 100000);
    s.kind = Kind::kDecoherence;
    s.t2_grid = {pi, 2 * pi, 3 * pi, 4 * pi, 5 * pi, 6 * pi, 1e9};
    s.t2_train_min = pi;
    s.t2_train_max = 6 * pi;
    if (desk) {
      s.test_samples = 500;
      s.train.epochs = 15;
    }
    s.description = "dephasing robustness: noiseless vs T2-trained models";
  } else if (name == "interval") {
    s = desk ? desk_base(Family::kXyChainZField, 3, 25)
             : paper_base(Family::kXyChainZField, 3, 25, 100000);
    s.kind = Kind::kInterval;
    if (desk) {
      s.test_samples = 500;
      s.train.epochs = 15;
    }
    s.description = "accuracy versus sampling interval at S=25";
  } else if (name == "scaling") {
    s = desk ? desk_base(Family::kXyChainZField, 2, 25)
             : paper_base(Family::kXyChainZField, 2, 25, 100000);
    s.kind = Kind::kScaling;
    if (desk) {
      s.test_samples = 500;
      s.train.epochs = 15;
    } else {
      s.scaling_qubits = {2, 3, 4, 5, 6};
      s.scaling_steps = {5, 10, 25, 50, 75};
    }
    s.description = "accuracy over qubit count and sampling points";
  } else {
    std::string msg = "no preset '" + name + "' in tier " + tier_name(tier) + "; available:";
    for (const auto& p : preset_catalog()) msg += " " + p.name + "/" + tier_name(p.tier);
    throw UnknownPresetError(msg);
  }
  s.name = name;
  s.tier = tier;
  return s;
}

const std::vector<std::pair<std::string, Tier>>& catalog_entries() {
  static const std::vector<std::pair<std::string, Tier>> entries = {
      {"ising1_2q", Tier::kDesk},    {"ising1_3q", Tier::kDesk},
      {"ising2_3q", Tier::kDesk},    {"timedep_3q", Tier::kDesk},
      {"noise", Tier::kDesk},        {"decoherence", Tier::kDesk},
      {"interval", Tier::kDesk},     {"scaling", Tier::kDesk},
      {"ising1_7q", Tier::kPaper},   {"ising2_6q", Tier::kPaper},
      {"timedep_3q", Tier::kPaper},  {"noise", Tier::kPaper},
      {"decoherence", Tier::kPaper}, {"interval", Tier::kPaper},
      {"scaling", Tier::kPaper}};
  return entries;
}

}  // namespace

std::string tier_name(Tier t) { return t == Tier::kDesk ? "desk" : "paper"; }

Tier parse_tier(const std::string& name) {
  if (name == "desk") return Tier::kDesk;
  if (name == "paper") return Tier::kPaper;
  throw std::invalid_argument("unknown tier '" + name + "' (expected desk or paper)");
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::kSingle: return "single";
    case Kind::kNoise: return "noise";
    case Kind::kDecoherence: return "decoherence";
    case Kind::kInterval: return "interval";
    case Kind::kScaling: return "scaling";
  }
  return "single";
}

Kind parse_kind(const std::string& name) {
  for (Kind k : {Kind::kSingle, Kind::kNoise, Kind::kDecoherence, Kind::kInterval, Kind::kScaling}) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

std::vector<PresetInfo> preset_catalog() {
  std::vector<PresetInfo> out;
  for (const auto& [name, tier] : catalog_entries()) {
    const auto s = build(name, tier);
    out.push_back({name, tier, s.kind, s.description});
  }
  return out;
}

ExperimentSpec get_preset(const std::string& name, Tier tier) { return build(name, tier); }

void ExperimentSpec::validate() const {
  data.validate();
  if (data.n_samples < 2) throw std::invalid_argument("dataset.train must be at least 2");
  if (test_samples < 1) throw std::invalid_argument("dataset.test must be positive");
  if (hidden < 1) throw std::invalid_argument("model.hidden must be positive");
  train.validate();
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("train.val_fraction must lie strictly between 0 and 1");
  }
  if (eval.gauss_eps < 0.0) throw std::invalid_argument("eval.gauss_eps must be non-negative");
  if (!eval.t2.empty() && eval.t2.size() != 1 &&
      eval.t2.size() != static_cast<std::size_t>(data.n_qubits)) {
    throw std::invalid_argument("eval.t2 needs one value or one per qubit");
  }
  for (double v : eval.t2) {
    if (!(v > 0.0)) throw std::invalid_argument("eval.t2 values must be positive");
  }
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  switch (kind) {
    case Kind::kSingle:
      break;
    case Kind::kNoise:
      need(!noise_train_eps.empty() && !noise_steps.empty() && !noise_test_eps.empty(),
           "noise sweep needs train eps, steps and test eps grids");
      for (double e : noise_train_eps) need(e >= 0.0, "noise train eps must be non-negative");
      for (double e : noise_test_eps) need(e >= 0.0, "noise test eps must be non-negative");
      for (int s : noise_steps) need(s >= 1, "noise steps must be positive");
      break;
    case Kind::kDecoherence:
      need(!t2_grid.empty(), "decoherence sweep needs a T2 grid");
      for (double t : t2_grid) need(t > 0.0, "T2 grid values must be positive");
      need(t2_train_min > 0.0 && t2_train_min <= t2_train_max,
           "decoherence sweep needs 0 < t2_train_min <= t2_train_max");
      break;
    case Kind::kInterval:
      need(!interval_factors.empty(), "interval sweep needs factors");
      for (double f : interval_factors) need(f > 0.0, "interval factors must be positive");
      break;
    case Kind::kScaling:
      need(!scaling_qubits.empty() && !scaling_steps.empty(), "scaling sweep needs grids");
      for (int n : scaling_qubits) {
        need(n >= 1, "scaling qubit counts must be positive");
        if (n > qsim::kDefaultMaxQubits) {
          throw CapacityError("scaling grid asks for " + std::to_string(n) + " qubits");
        }
      }
      for (int s : scaling_steps) need(s >= 1, "scaling steps must be positive");
      break;
  }
}

nn::NetworkArch ExperimentSpec::arch() const { return nn::NetworkArch::for_dataset(data, hidden); }

dataset::DatasetMeta ExperimentSpec::train_meta() const {
  dataset::DatasetMeta m = data;
  m.master_seed = dataset::derive_seed(seed, 1);
  return m;
}

dataset::DatasetMeta ExperimentSpec::test_meta() const {
  // Test sets are stored clean; corruption is applied at evaluation time.
  dataset::DatasetMeta m = data;
  m.gauss_eps = 0.0;
  m.t2.clear();
  m.t2_min = m.t2_max = 0.0;
  m.n_samples = test_samples;
  m.master_seed = dataset::derive_seed(seed, 2);
  return m;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentSpec& s) {
  const auto& d = s.data;
  const auto& t = s.train;
  return {
      {"run.name", s.name},
      {"run.tier", tier_name(s.tier)},
      {"run.kind", kind_name(s.kind)},
      {"run.seed", std::to_string(s.seed)},
      {"dataset.family", std::string(qsim::family_name(d.family))},
      {"dataset.n_qubits", std::to_string(d.n_qubits)},
      {"dataset.steps", std::to_string(d.grid.n_points)},
      {"dataset.tau", fmt(d.grid.tau)},
      {"dataset.j0", fmt(d.j0)},
      {"dataset.fourier_terms", std::to_string(d.fourier_terms)},
      {"dataset.gauss_eps", fmt(d.gauss_eps)},
      {"dataset.t2", fmt_list(d.t2)},
      {"dataset.t2_min", fmt(d.t2_min)},
      {"dataset.t2_max", fmt(d.t2_max)},
      {"dataset.train", std::to_string(d.n_samples)},
      {"dataset.test", std::to_string(s.test_samples)},
      {"model.hidden", std::to_string(s.hidden)},
      {"train.epochs", std::to_string(t.epochs)},
      {"train.batch_size", std::to_string(t.batch_size)},
      {"train.learning_rate", fmt(t.adam.learning_rate)},
      {"train.beta1", fmt(t.adam.beta1)},
      {"train.beta2", fmt(t.adam.beta2)},
      {"train.adam_epsilon", fmt(t.adam.epsilon)},
      {"train.lr_decay", fmt(t.lr_decay)},
      {"train.noise_eps", fmt(t.noise_eps)},
      {"train.grad_clip", fmt(t.grad_clip)},
      {"train.patience", std::to_string(t.patience)},
      {"train.val_fraction", fmt(s.val_fraction)},
      {"eval.gauss_eps", fmt(s.eval.gauss_eps)},
      {"eval.t2", fmt_list(s.eval.t2)},
      {"eval.seed", std::to_string(s.eval.seed)},
      {"sweep.noise_train_eps", fmt_list(s.noise_train_eps)},
      {"sweep.noise_steps", fmt_list(s.noise_steps)},
      {"sweep.noise_test_eps", fmt_list(s.noise_test_eps)},
      {"sweep.t2_grid", fmt_list(s.t2_grid)},
      {"sweep.t2_train_min", fmt(s.t2_train_min)},
      {"sweep.t2_train_max", fmt(s.t2_train_max)},
      {"sweep.interval_factors", fmt_list(s.interval_factors)},
      {"sweep.scaling_qubits", fmt_list(s.scaling_qubits)},
      {"sweep.scaling_steps", fmt_list(s.scaling_steps)},
      {"sweep.frontier", fmt(s.frontier)},
  };
}

void set_key(ExperimentSpec& s, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto& d = s.data;
  auto& t = s.train;
  auto dbl = [&] { return parse_num<double>(key, v); };
  auto integer = [&] { return parse_num<int>(key, v); };
  auto count = [&] { return parse_num<std::size_t>(key, v); };
  if (key == "run.name") {
    if (v.empty() || v.find_first_of("/\\ ") != std::string::npos) {
      throw std::invalid_argument("run.name must be a non-empty file-name stem");
    }
    s.name = v;
  } else if (key == "run.tier") {
    s.tier = parse_tier(v);
  } else if (key == "run.kind") {
    s.kind = parse_kind(v);
  } else if (key == "run.seed") {
    s.seed = parse_num<std::uint64_t>(key, v);
  } else if (key == "dataset.family") {
    d.family = qsim::parse_family(v);
  } else if (key == "dataset.n_qubits") {
    d.n_qubits = integer();
  } else if (key == "dataset.steps") {
    d.grid.n_points = integer();
  } else if (key == "dataset.tau") {
    d.grid.tau = dbl();
  } else if (key == "dataset.j0") {
    d.j0 = dbl();
  } else if (key == "dataset.fourier_terms") {
    d.fourier_terms = integer();
  } else if (key == "dataset.gauss_eps") {
    d.gauss_eps = dbl();
  } else if (key == "dataset.t2") {
    d.t2 = parse_list<double>(key, v);
  } else if (key == "dataset.t2_min") {
    d.t2_min = dbl();
  } else if (key == "dataset.t2_max") {
    d.t2_max = dbl();
  } else if (key == "dataset.train") {
    d.n_samples = count();
  } else if (key == "dataset.test") {
    s.test_samples = count();
  } else if (key == "model.hidden") {
    s.hidden = integer();
  } else if (key == "train.epochs") {
    t.epochs = integer();
  } else if (key == "train.batch_size") {
    t.batch_size = integer();
  } else if (key == "train.learning_rate") {
    t.adam.learning_rate = dbl();
  } else if (key == "train.beta1") {
    t.adam.beta1 = dbl();
  } else if (key == "train.beta2") {
    t.adam.beta2 = dbl();
  } else if (key == "train.adam_epsilon") {
    t.adam.epsilon = dbl();
  } else if (key == "train.lr_decay") {
    t.lr_decay = dbl();
  } else if (key == "train.noise_eps") {
    t.noise_eps = dbl();
  } else if (key == "train.grad_clip") {
    t.grad_clip = dbl();
  } else if (key == "train.patience") {
    t.patience = integer();
  } else if (key == "train.val_fraction") {
    s.val_fraction = dbl();
  } else if (key == "eval.gauss_eps") {
    s.eval.gauss_eps = dbl();
  } else if (key == "eval.t2") {
    s.eval.t2 = parse_list<double>(key, v);
  } else if (key == "eval.seed") {
    s.eval.seed = parse_num<std::uint64_t>(key, v);
  } else if (key == "sweep.noise_train_eps") {
    s.noise_train_eps = parse_list<double>(key, v);
  } else if (key == "sweep.noise_steps") {
    s.noise_steps = parse_list<int>(key, v);
  } else if (key == "sweep.noise_test_eps") {
    s.noise_test_eps = parse_list<double>(key, v);
  } else if (key == "sweep.t2_grid") {
    s.t2_grid = parse_list<double>(key, v);
  } else if (key == "sweep.t2_train_min") {
    s.t2_train_min = dbl();
  } else if (key == "sweep.t2_train_max") {
    s.t2_train_max = dbl();
  } else if (key == "sweep.interval_factors") {
    s.interval_factors = parse_list<double>(key, v);
  } else if (key == "sweep.scaling_qubits") {
    s.scaling_qubits = parse_list<int>(key, v);
  } else if (key == "sweep.scaling_steps") {
    s.scaling_steps = parse_list<int>(key, v);
  } else if (key == "sweep.frontier") {
    s.frontier = dbl();
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

std::string config_digest(const ExperimentSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : to_key_values(spec)) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_effective_config(const std::filesystem::path& path, const ExperimentSpec& spec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "; effective configuration, digest " << config_digest(spec) << '\n';
  std::string section;
  for (const auto& [k, v] : to_key_values(spec)) {
    const auto dot = k.find('.');
    const std::string sec = k.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << k.substr(dot + 1) << " = " << v << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace hamlearn::experiments
