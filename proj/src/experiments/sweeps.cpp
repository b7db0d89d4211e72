#include <cstdio>
#include <fstream>
#include <numbers>

#include "hamlearn/experiments.hpp"
#include "hamlearn/textio.hpp"

namespace hamlearn::experiments {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  std::string s;
  textio::append_double(s, v);
  return s;
}

std::string label(const char* fmt, double a, double b = 0.0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

fs::path cache_of(const RunOptions& o) { return o.cache_dir.empty() ? o.out_dir / "data" : o.cache_dir; }

// A single-run copy of the sweep spec with its own output directory.
std::pair<ExperimentSpec, RunOptions> cell(const ExperimentSpec& spec, const RunOptions& opts,
                                           const std::string& name) {
  ExperimentSpec s = spec;
  s.kind = Kind::kSingle;
  s.name = name;
  s.eval = {};
  RunOptions o = opts;
  o.out_dir = opts.out_dir / name;
  o.cache_dir = cache_of(opts);
  return {s, o};
}

SweepPoint point(const std::string& model, std::map<std::string, double> coords,
                 const EvalReport& r) {
  return {model, std::move(coords), r.mean_similarity, r.mse, r.undefined};
}

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... cols) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cols), ...);
    out_ << '\n';
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

SweepResult noise_sweep(const ExperimentSpec& spec, const RunOptions& opts) {
  SweepResult res;
  const fs::path table = opts.out_dir / "noise.csv";
  Csv csv(table, "model,train_eps,steps,test_eps,mean_F,mse,undefined");
  for (int steps : spec.noise_steps) {
    for (double train_eps : spec.noise_train_eps) {
      const std::string name = label("noise%g_s%g", train_eps, steps);
      auto [s, o] = cell(spec, opts, name);
      s.data.grid.n_points = steps;
      s.train.noise_eps = train_eps;
      const auto run = run_experiment(s, o);
      const nn::Network net(run.checkpoint.arch, run.checkpoint.params);
      const auto test = cached_dataset(s.test_meta(), o.cache_dir, "test", o.jobs);
      for (std::size_t k = 0; k < spec.noise_test_eps.size(); ++k) {
        const double eps = spec.noise_test_eps[k];
        // same noisy test records for every model at this S
        const Corruption c{eps, {}, dataset::derive_seed(spec.seed, 1000 + k)};
        const auto r = evaluate(net, corrupt(test, c, o.jobs));
        res.points.push_back(point(name, {{"train_eps", train_eps}, {"steps", steps}, {"test_eps", eps}}, r));
        csv.row(name, num(train_eps), steps, num(eps), num(r.mean_similarity), num(r.mse), r.undefined);
      }
    }
  }
  csv.finish();
  res.tables.push_back(table);
  return res;
}

SweepResult decoherence_sweep(const ExperimentSpec& spec, const RunOptions& opts) {
  SweepResult res;
  const fs::path table = opts.out_dir / "decoherence.csv";
  Csv csv(table, "model,dephased,t2,t2_over_pi,mean_F,mse,undefined");
  for (const bool t2_trained : {false, true}) {
    const std::string name = t2_trained ? "t2_trained" : "noiseless";
    auto [s, o] = cell(spec, opts, name);
    s.data.t2.clear();
    s.data.t2_min = t2_trained ? spec.t2_train_min : 0.0;
    s.data.t2_max = t2_trained ? spec.t2_train_max : 0.0;
    const auto run = run_experiment(s, o);
    res.points.push_back(point(name, {{"dephased", 0.0}, {"t2", 0.0}}, run.report));
    csv.row(name, 0, 0, 0, num(run.report.mean_similarity), num(run.report.mse), run.report.undefined);
    const nn::Network net(run.checkpoint.arch, run.checkpoint.params);
    const auto test = cached_dataset(s.test_meta(), o.cache_dir, "test", o.jobs);
    for (double t2 : spec.t2_grid) {
      const auto r = evaluate(net, corrupt(test, {0.0, {t2}, 0}, o.jobs));
      res.points.push_back(point(name, {{"dephased", 1.0}, {"t2", t2}}, r));
      csv.row(name, 1, num(t2), num(t2 / std::numbers::pi), num(r.mean_similarity), num(r.mse),
              r.undefined);
    }
  }
  csv.finish();
  res.tables.push_back(table);
  return res;
}

SweepResult interval_sweep(const ExperimentSpec& spec, const RunOptions& opts) {
  SweepResult res;
  const fs::path table = opts.out_dir / "interval.csv";
  Csv csv(table, "tau_factor,tau,steps,mean_F,mse,undefined");
  auto factors = spec.interval_factors;
  std::sort(factors.begin(), factors.end());
  for (double f : factors) {
    const std::string name = label("interval_x%g", f);
    auto [s, o] = cell(spec, opts, name);
    s.data.grid.tau = spec.data.grid.tau * f;
    const auto r = run_experiment(s, o).report;
    res.points.push_back(point(name, {{"tau_factor", f}, {"tau", s.data.grid.tau}}, r));
    csv.row(num(f), num(s.data.grid.tau), s.data.grid.n_points, num(r.mean_similarity), num(r.mse),
            r.undefined);
  }
  csv.finish();
  res.tables.push_back(table);
  return res;
}

SweepResult scaling_sweep(const ExperimentSpec& spec, const RunOptions& opts) {
  SweepResult res;
  const fs::path table = opts.out_dir / "scaling.csv";
  std::map<std::pair<int, int>, double> acc;
  {
    Csv csv(table, "n_qubits,steps,mean_F,mse,undefined");
    for (int n : spec.scaling_qubits) {
      for (int steps : spec.scaling_steps) {
        const std::string name = label("scaling_n%g_s%g", n, steps);
        auto [s, o] = cell(spec, opts, name);
        s.data.n_qubits = n;
        s.data.grid.n_points = steps;
        const auto r = run_experiment(s, o).report;
        acc[{n, steps}] = r.mean_similarity;
        res.points.push_back(point(name, {{"n_qubits", n}, {"steps", steps}}, r));
        csv.row(n, steps, num(r.mean_similarity), num(r.mse), r.undefined);
      }
    }
    csv.finish();
  }
  const fs::path matrix = opts.out_dir / "scaling_matrix.csv";
  {
    std::string header = "n_qubits";
    for (int steps : spec.scaling_steps) header += ",S=" + std::to_string(steps);
    Csv csv(matrix, header);
    for (int n : spec.scaling_qubits) {
      std::string line = std::to_string(n);
      for (int steps : spec.scaling_steps) line += "," + num(acc[{n, steps}]);
      csv.row(line);
    }
    csv.finish();
  }
  const fs::path frontier = opts.out_dir / "scaling_frontier.csv";
  {
    Csv csv(frontier, "n_qubits,min_steps,threshold");
    auto steps_sorted = spec.scaling_steps;
    std::sort(steps_sorted.begin(), steps_sorted.end());
    for (int n : spec.scaling_qubits) {
      std::string min_steps;  // empty when no cell reaches the threshold
      for (int steps : steps_sorted) {
        if (acc[{n, steps}] >= spec.frontier) {
          min_steps = std::to_string(steps);
          break;
        }
      }
      csv.row(n, min_steps, num(spec.frontier));
    }
    csv.finish();
  }
  res.tables = {table, matrix, frontier};
  return res;
}

}  // namespace

SweepResult run_sweep(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  if (opts.out_dir.empty()) throw std::invalid_argument("sweep needs an output directory");
  fs::create_directories(opts.out_dir);
  SweepResult res;
  switch (spec.kind) {
    case Kind::kSingle: {
      const auto run = run_experiment(spec, opts);
      res.points.push_back(point(spec.name, {}, run.report));
      res.tables.push_back(run.report_path);
      break;
    }
    case Kind::kNoise:
      write_effective_config(opts.out_dir / "effective_config.ini", spec);
      res = noise_sweep(spec, opts);
      break;
    case Kind::kDecoherence:
      write_effective_config(opts.out_dir / "effective_config.ini", spec);
      res = decoherence_sweep(spec, opts);
      break;
    case Kind::kInterval:
      write_effective_config(opts.out_dir / "effective_config.ini", spec);
      res = interval_sweep(spec, opts);
      break;
    case Kind::kScaling:
      write_effective_config(opts.out_dir / "effective_config.ini", spec);
      res = scaling_sweep(spec, opts);
      break;
  }
  res.kind = spec.kind;
  return res;
}

}  // namespace hamlearn::experiments
