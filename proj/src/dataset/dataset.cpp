#include "hamlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "hamlearn/errors.hpp"
#include "hamlearn/textio.hpp"

namespace hamlearn::dataset {

using nlohmann::json;

std::size_t DatasetMeta::input_length() const {
  return 3 * static_cast<std::size_t>(n_qubits) * static_cast<std::size_t>(grid.n_points);
}

std::size_t DatasetMeta::target_length() const {
  if (family == qsim::Family::kXyChainTdZField) {
    return static_cast<std::size_t>(grid.n_points) * static_cast<std::size_t>(n_qubits) +
           static_cast<std::size_t>(n_qubits - 1);
  }
  return qsim::static_param_count(family, n_qubits);
}

void DatasetMeta::validate() const {
  if (n_qubits < 1) throw SpecError("n_qubits must be positive");
  if (n_qubits > qsim::kDefaultMaxQubits) {
    throw CapacityError(std::to_string(n_qubits) + " qubits exceeds the cap of " +
                        std::to_string(qsim::kDefaultMaxQubits));
  }
  grid.validate();
  if (!(j0 > 0.0)) throw SpecError("j0 must be positive");
  if (family == qsim::Family::kXyChainTdZField && fourier_terms < 1) {
    throw SpecError("fourier_terms must be positive");
  }
  if (gauss_eps < 0.0) throw SpecError("gauss_eps must be non-negative");
  if (!t2.empty()) {
    if (t2.size() != static_cast<std::size_t>(n_qubits)) {
      throw SpecError("t2 needs one value per qubit");
    }
    for (double v : t2) {
      if (!(v > 0.0)) throw SpecError("t2 values must be positive");
    }
    if (random_t2()) throw SpecError("t2 and t2_min/t2_max are mutually exclusive");
  }
  if (random_t2() && !(t2_min > 0.0 && t2_min <= t2_max)) {
    throw SpecError("t2 range must satisfy 0 < t2_min <= t2_max");
  }
  if (format_version != kFormatVersion) {
    throw VersionError("dataset format_version " + std::to_string(format_version) +
                       " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

qsim::HamiltonianSpec sample_parameters(qsim::Family family, int n_qubits, std::mt19937_64& rng,
                                        double j0, int fourier_terms) {
  qsim::HamiltonianSpec spec;
  spec.family = family;
  spec.n_qubits = n_qubits;
  spec.j0 = j0;
  std::uniform_real_distribution<double> sym(-j0, j0);
  spec.static_params.resize(qsim::static_param_count(family, n_qubits));
  if (family == qsim::Family::kXyChainTdZField) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    spec.fourier_params.resize(static_cast<std::size_t>(n_qubits));
    for (auto& terms : spec.fourier_params) {
      terms.resize(static_cast<std::size_t>(fourier_terms));
      for (auto& t : terms) {
        t.amplitude = sym(rng);
        t.frequency = sym(rng);
        t.phase = phase(rng);
      }
    }
  }
  for (double& p : spec.static_params) p = sym(rng);
  spec.validate();
  return spec;
}

std::vector<double> target_from_spec(const qsim::HamiltonianSpec& spec,
                                     const record::SamplingGrid& grid) {
  if (!spec.time_dependent()) return spec.static_params;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid.n_points * spec.n_qubits) + spec.static_params.size());
  for (int s = 1; s <= grid.n_points; ++s) {
    for (int q = 1; q <= spec.n_qubits; ++q) out.push_back(spec.field(q, s * grid.tau));
  }
  out.insert(out.end(), spec.static_params.begin(), spec.static_params.end());
  return out;
}

qsim::HamiltonianSpec spec_from_target(qsim::Family family, int n_qubits,
                                       std::span<const double> target, double j0) {
  if (family == qsim::Family::kXyChainTdZField) {
    throw SpecError("time-dependent targets do not determine the Fourier parameters");
  }
  qsim::HamiltonianSpec spec;
  spec.family = family;
  spec.n_qubits = n_qubits;
  spec.j0 = j0;
  spec.static_params.assign(target.begin(), target.end());
  spec.validate();
  return spec;
}

Sample generate_sample(const DatasetMeta& meta, std::size_t index) {
  std::mt19937_64 rng(derive_seed(meta.master_seed, index));
  const auto spec =
      sample_parameters(meta.family, meta.n_qubits, rng, meta.j0, meta.fourier_terms);
  record::NoiseSpec noise;
  noise.gaussian_sigma = meta.gauss_eps;
  if (meta.random_t2()) {
    std::uniform_real_distribution<double> t2(meta.t2_min, meta.t2_max);
    noise.t2.assign(static_cast<std::size_t>(meta.n_qubits), t2(rng));
  } else {
    noise.t2 = meta.t2;
  }
  noise.rng_seed = rng();
  const auto rec = record::record_trajectory(spec, meta.grid, noise);
  return Sample{record::flatten_record(rec), target_from_spec(spec, meta.grid)};
}

std::vector<Sample> generate_samples(const DatasetMeta& meta, int jobs) {
  meta.validate();
  std::vector<Sample> out(meta.n_samples);
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || meta.n_samples < 2) {
    for (std::size_t i = 0; i < meta.n_samples; ++i) out[i] = generate_sample(meta, i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < meta.n_samples; i += workers) out[i] = generate_sample(meta, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

json meta_to_json(const DatasetMeta& m) {
  return json{{"format", "hamlearn-dataset"},
              {"format_version", m.format_version},
              {"family", std::string(qsim::family_name(m.family))},
              {"n_qubits", m.n_qubits},
              {"tau", m.grid.tau},
              {"n_points", m.grid.n_points},
              {"j0", m.j0},
              {"fourier_terms", m.fourier_terms},
              {"gauss_eps", m.gauss_eps},
              {"t2", m.t2},
              {"t2_min", m.t2_min},
              {"t2_max", m.t2_max},
              {"n_samples", m.n_samples},
              {"master_seed", m.master_seed},
              {"input_length", m.input_length()},
              {"target_length", m.target_length()}};
}

DatasetMeta meta_from_json(const json& j) {
  if (j.value("format", std::string()) != "hamlearn-dataset") {
    throw FormatError("not a hamlearn dataset header");
  }
  DatasetMeta m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kFormatVersion) {
    throw VersionError("dataset format_version " + std::to_string(m.format_version) +
                       " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  m.family = qsim::parse_family(j.at("family").get<std::string>());
  m.n_qubits = j.at("n_qubits").get<int>();
  m.grid.tau = j.at("tau").get<double>();
  m.grid.n_points = j.at("n_points").get<int>();
  m.j0 = j.at("j0").get<double>();
  m.fourier_terms = j.at("fourier_terms").get<int>();
  m.gauss_eps = j.at("gauss_eps").get<double>();
  m.t2 = j.at("t2").get<std::vector<double>>();
  m.t2_min = j.at("t2_min").get<double>();
  m.t2_max = j.at("t2_max").get<double>();
  m.n_samples = j.at("n_samples").get<std::size_t>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.validate();
  if (j.at("input_length").get<std::size_t>() != m.input_length() ||
      j.at("target_length").get<std::size_t>() != m.target_length()) {
    throw FormatError("dataset header lengths disagree with its family and grid");
  }
  return m;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  ds.meta.validate();
  if (ds.samples.size() != ds.meta.n_samples) {
    throw FormatError("dataset holds " + std::to_string(ds.samples.size()) +
                      " samples but meta declares " + std::to_string(ds.meta.n_samples));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << meta_to_json(ds.meta).dump() << '\n';
  std::string line;
  for (const auto& s : ds.samples) {
    if (s.input.size() != ds.meta.input_length() || s.target.size() != ds.meta.target_length()) {
      throw ShapeError("sample shape disagrees with dataset meta");
    }
    line.clear();
    textio::append_doubles(line, s.input);
    line.push_back(' ');
    textio::append_doubles(line, s.target);
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void generate_dataset(const DatasetMeta& meta, const std::filesystem::path& path, int jobs) {
  write_dataset(path, Dataset{meta, generate_samples(meta, jobs)});
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty dataset file");
  Dataset ds;
  try {
    ds.meta = meta_from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": unreadable dataset header: " + e.what());
  }
  const std::size_t n_in = ds.meta.input_length();
  const std::size_t n_out = ds.meta.target_length();
  ds.samples.reserve(ds.meta.n_samples);
  while (ds.samples.size() < ds.meta.n_samples && std::getline(in, line)) {
    const std::size_t row = ds.samples.size() + 1;
    std::vector<double> v;
    try {
      v = textio::parse_doubles(line);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": sample " + std::to_string(row) + ": " + e.what());
    }
    if (v.size() != n_in + n_out) {
      throw FormatError(path.string() + ": sample " + std::to_string(row) + " has " +
                        std::to_string(v.size()) + " values, expected " +
                        std::to_string(n_in + n_out) + " (corrupt or truncated)");
    }
    Sample s;
    s.input.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_in));
    s.target.assign(v.begin() + static_cast<std::ptrdiff_t>(n_in), v.end());
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.size() != ds.meta.n_samples) {
    throw FormatError(path.string() + ": truncated, header declares " +
                      std::to_string(ds.meta.n_samples) + " samples but found " +
                      std::to_string(ds.samples.size()));
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw FormatError(path.string() + ": trailing data after the declared samples");
    }
  }
  return ds;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_dataset(
    const std::vector<Sample>& samples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = samples.size();
  const auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_first == 0 || n_first == n) {
    throw std::invalid_argument("split of " + std::to_string(n) + " samples at fraction " +
                                std::to_string(fraction) + " leaves an empty part");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  out.first.reserve(n_first);
  out.second.reserve(n - n_first);
  for (std::size_t k = 0; k < n; ++k) {
    (k < n_first ? out.first : out.second).push_back(samples[order[k]]);
  }
  return out;
}

}  // namespace hamlearn::dataset
