#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include "hamlearn/errors.hpp"
#include "hamlearn/experiments.hpp"
#include "hamlearn/neuralnet/metrics.hpp"
#include "hamlearn/textio.hpp"

namespace hamlearn::experiments {
namespace {

// Runs body(i) for i in [0, n) on up to `jobs` threads, strided by index.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void open_or_throw(std::ofstream& out, const std::filesystem::path& p) {
  out.open(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::string s;
  textio::append_double(s, v);
  return s;
}

}  // namespace

EvalReport evaluate(const nn::Network& net, const std::vector<dataset::Sample>& samples,
                    const std::string& digest) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport r;
  r.config_digest = digest;
  r.n_samples = samples.size();
  const auto preds = net.predict_all(samples);
  r.similarity.resize(samples.size());
  r.sample_mse.resize(samples.size());
  double sim_sum = 0.0, mse_sum = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    r.sample_mse[k] = nn::mse_loss(preds[k], samples[k].target);
    mse_sum += r.sample_mse[k];
    try {
      r.similarity[k] = nn::cosine_similarity(preds[k], samples[k].target);
      sim_sum += r.similarity[k];
    } catch (const UndefinedSimilarityError&) {
      r.similarity[k] = std::numeric_limits<double>::quiet_NaN();
      ++r.undefined;
    }
  }
  const std::size_t defined = samples.size() - r.undefined;
  r.mean_similarity = defined ? sim_sum / static_cast<double>(defined) : 0.0;
  r.mse = samples.empty() ? 0.0 : mse_sum / static_cast<double>(samples.size());
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<dataset::Sample> corrupt(const dataset::Dataset& clean, const Corruption& c, int jobs) {
  std::vector<dataset::Sample> out = clean.samples;
  if (c.gauss_eps < 0.0) throw SpecError("Gaussian noise sigma must be non-negative");
  if (!c.t2.empty()) {
    dataset::DatasetMeta m = clean.meta;
    const auto n = static_cast<std::size_t>(m.n_qubits);
    if (c.t2.size() != 1 && c.t2.size() != n) {
      throw SpecError("T2 corruption needs one value or one per qubit");
    }
    m.t2 = c.t2.size() == 1 ? std::vector<double>(n, c.t2[0]) : c.t2;
    m.t2_min = m.t2_max = 0.0;
    m.gauss_eps = 0.0;
    m.validate();
    parallel_for(out.size(), jobs, [&](std::size_t i) {
      auto s = dataset::generate_sample(m, i);
      if (s.target != clean.samples[i].target) {
        throw FormatError("test sample " + std::to_string(i) +
                          " cannot be regenerated from its dataset metadata");
      }
      out[i].input = std::move(s.input);
    });
  }
  if (c.gauss_eps > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      record::add_gaussian_noise_inplace(out[i].input, c.gauss_eps, dataset::derive_seed(c.seed, i));
    }
  }
  return out;
}

void write_report(const std::filesystem::path& summary_csv,
                  const std::filesystem::path& per_sample_csv, const EvalReport& r) {
  std::ofstream s;
  open_or_throw(s, summary_csv);
  s << "mean_F,mse,n_samples,undefined,runtime_s,config_digest,per_sample_file\n";
  s << num(r.mean_similarity) << ',' << num(r.mse) << ',' << r.n_samples << ',' << r.undefined
    << ',' << num(r.runtime_seconds) << ',' << r.config_digest << ','
    << per_sample_csv.filename().string() << '\n';
  std::ofstream p;
  open_or_throw(p, per_sample_csv);
  p << "index,F,mse\n";
  for (std::size_t k = 0; k < r.similarity.size(); ++k) {
    p << k << ',' << num(r.similarity[k]) << ',' << num(r.sample_mse[k]) << '\n';
  }
  if (!s || !p) throw std::runtime_error("failed writing report files");
}

void write_metrics(const std::filesystem::path& csv, const std::vector<nn::EpochMetrics>& history) {
  std::ofstream out;
  open_or_throw(out, csv);
  out << "epoch,train_loss,val_loss,val_F\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << num(m.train_loss) << ',' << num(m.val_loss) << ','
        << num(m.val_similarity) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + csv.string());
}

}  // namespace hamlearn::experiments
