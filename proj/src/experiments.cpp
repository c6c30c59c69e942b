#include "spacl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "spacl/metrics.hpp"
#include "spacl/sampling.hpp"
#include "spacl/spectral.hpp"

namespace spacl {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_sweep(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

Matrix uniform_offdiag_B(int K, double diag, double offdiag) {
  Matrix b = Matrix::Constant(K, K, offdiag);
  b.diagonal().setConstant(diag);
  return b;
}

Matrix beta_diag_B(const Vector& beta, double offdiag) {
  const int K = static_cast<int>(beta.size());
  Matrix b = Matrix::Constant(K, K, offdiag);
  b.diagonal() = beta / beta.maxCoeff();
  return b;
}

std::vector<double> arange(double lo, double hi, double step) {
  std::vector<double> out;
  for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1b", "fig2a", "fig2b", "fig2c", "fig2d", "suppK", "suppAlpha", "prune-diag"};
}

std::int64_t preset_default_n(const std::string& preset) {
  if (preset == "prune-diag") return 0;  // the grid carries its own n
  return 5000;
}

std::vector<PresetPoint> preset_points(const std::string& preset, std::int64_t n_override) {
  const std::int64_t n = n_override > 0 ? n_override : preset_default_n(preset);
  std::vector<PresetPoint> points;

  if (preset == "fig1b") {
    // B = (1-q) I + q 11', q = 0.001; rho from 0.005 to 0.007.
    for (double rho : {0.005, 0.006, 0.007}) {
      points.push_back({format_sweep(rho), rho,
                        [rho](std::int64_t nn) {
                          return ModelParams(nn, 3, Vector::Constant(3, 0.4),
                                             uniform_offdiag_B(3, 1.0, 0.001), rho);
                        },
                        n});
    }
  } else if (preset == "fig2a") {
    // beta = (0.5-e, 0.5, 0.5+e), diag B = beta/max(beta), off-diag 0.05.
    for (double e : arange(0.05, 0.45, 0.05)) {
      points.push_back({format_sweep(e), e,
                        [e](std::int64_t nn) {
                          Vector beta(3);
                          beta << 0.5 - e, 0.5, 0.5 + e;
                          return ModelParams(nn, 3, Vector::Constant(3, 1.0 / 3.0),
                                             beta_diag_B(beta, 0.05), 0.2);
                        },
                        n});
    }
  } else if (preset == "fig2b") {
    // beta_i = 0.5 + (i-4) e, i in [7]; off-diag 0.2; alpha_i = 0.1.
    for (double e : arange(0.02, 0.16, 0.02)) {
      points.push_back({format_sweep(e), e,
                        [e](std::int64_t nn) {
                          Vector beta(7);
                          for (int i = 1; i <= 7; ++i) beta[i - 1] = 0.5 + (i - 4) * e;
                          return ModelParams(nn, 7, Vector::Constant(7, 0.1),
                                             beta_diag_B(beta, 0.2), 0.15);
                        },
                        n});
    }
  } else if (preset == "fig2c") {
    // B_ii = 1, B_ij = e, K = 7, alpha_i = 1/3.
    for (double e : arange(0.1, 0.7, 0.1)) {
      points.push_back({format_sweep(e), e,
                        [e](std::int64_t nn) {
                          return ModelParams(nn, 7, Vector::Constant(7, 1.0 / 3.0),
                                             uniform_offdiag_B(7, 1.0, e), 0.15);
                        },
                        n});
    }
  } else if (preset == "fig2d") {
    // B = [1 .2 .1; .2 .5 .075i; .1 .075i 0], i in [15]; lambda_K(B) goes
    // negative as i grows. The params constructor renormalizes when the
    // sweep pushes an entry past 1.
    for (int i = 1; i <= 15; ++i) {
      points.push_back({std::to_string(i), static_cast<double>(i),
                        [i](std::int64_t nn) {
                          Matrix b(3, 3);
                          const double c = 0.075 * i;
                          b << 1.0, 0.2, 0.1, 0.2, 0.5, c, 0.1, c, 0.0;
                          return ModelParams(nn, 3, Vector::Constant(3, 1.0 / 3.0), b, 0.15);
                        },
                        n});
    }
  } else if (preset == "suppK") {
    // B_ii = 1, B_ij = 0.4, alpha_i = 1/K, K sweeps.
    for (int K = 2; K <= 8; ++K) {
      points.push_back({std::to_string(K), static_cast<double>(K),
                        [K](std::int64_t nn) {
                          return ModelParams(nn, K, Vector::Constant(K, 1.0 / K),
                                             uniform_offdiag_B(K, 1.0, 0.4), 0.15);
                        },
                        n});
    }
  } else if (preset == "suppAlpha") {
    // alpha = (0.5-e, 0.5, 0.5+e), B_ii = 1, B_ij = 0.5.
    for (double e : arange(0.05, 0.45, 0.05)) {
      points.push_back({format_sweep(e), e,
                        [e](std::int64_t nn) {
                          Vector alpha(3);
                          alpha << 0.5 - e, 0.5, 0.5 + e;
                          return ModelParams(nn, 3, alpha,
                                             uniform_offdiag_B(3, 1.0, 0.5), 0.15);
                        },
                        n});
    }
  } else if (preset == "prune-diag") {
    // K in {2..10} x n in {2000..6000}; alpha = 1/K, B_ij = 0.001,
    // rho = log(n)/n.
    for (int K = 2; K <= 10; ++K) {
      for (std::int64_t nn : {2000, 3000, 4000, 5000, 6000}) {
        const std::int64_t point_n = n_override > 0 ? n_override : nn;
        points.push_back({"K" + std::to_string(K) + "_n" + std::to_string(point_n),
                          static_cast<double>(K * 1000000 + point_n),
                          [K](std::int64_t m) {
                            return ModelParams(m, K, Vector::Constant(K, 1.0 / K),
                                               uniform_offdiag_B(K, 1.0, 0.001),
                                               std::log(static_cast<double>(m)) /
                                                   static_cast<double>(m));
                          },
                          point_n});
      }
    }
  } else {
    throw ValueError("unknown preset: " + preset);
  }
  return points;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "preset=" << preset << "\n";
  out << "n=" << n << "\n";
  out << "seeds=";
  for (size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\n";
  out << "metrics=";
  for (size_t i = 0; i < metrics.size(); ++i) out << (i ? "," : "") << metrics[i];
  out << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValueError("config: expected key=value, got " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "preset") {
      config.preset = value;
    } else if (key == "n") {
      config.n = std::stoll(value);
    } else if (key == "seeds") {
      config.seeds.clear();
      std::istringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) config.seeds.push_back(std::stoull(tok));
    } else if (key == "seed_count") {
      config.seeds.clear();
      const auto count = std::stoull(value);
      for (std::uint64_t s = 1; s <= count; ++s) config.seeds.push_back(s);
    } else if (key == "metrics") {
      config.metrics.clear();
      std::istringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok != "relfrob" && tok != "rowwise" && tok != "rc")
          throw ValueError("config: unknown metric " + tok);
        config.metrics.push_back(tok);
      }
    } else if (key == "threads") {
      config.threads = std::stoi(value);
    } else {
      throw ValueError("config: unknown key " + key);
    }
  }
  if (config.preset.empty()) throw ValueError("config: preset missing");
  return config;
}

namespace {

struct Job {
  size_t point = 0;
  size_t seed_idx = 0;
};

std::vector<ExperimentRow> run_point_seed(const PresetPoint& point, std::uint64_t seed,
                                          bool diagnostic,
                                          const std::vector<std::string>& metrics) {
  const ModelParams params = point.make_params(point.n);
  SamplerConfig sampler{seed, true, PurePlacement::kFirstKRows};
  const MembershipMatrix theta = sample_theta(params, sampler);
  const SparseSymmetricGraph graph = sample_adjacency(theta, params, sampler);

  std::vector<ExperimentRow> rows;
  if (diagnostic) {
    const Spectrum spectrum = top_k_eigs(graph, params.K());
    const Spectrum population = population_spectrum(theta, params);
    Matrix corners(params.K(), params.K());
    for (int j = 0; j < params.K(); ++j)
      corners.row(j) = population.eigenvectors.row(theta.pure_rows()[static_cast<size_t>(j)]);
    const DiagnosticReport rep = pruning_diagnostic(spectrum.eigenvectors, theta, corners,
                                                    PruneConfig{}, 0.0);
    rows.push_back({point.sweep_label, seed, "diag", "s0_fraction", rep.s0_fraction});
    rows.push_back({point.sweep_label, seed, "diag", "m", rep.m});
  } else {
    for (bool use_prune : {true, false}) {
      const FitResult fit = spacl(graph, params.K(), PruneConfig{}, use_prune);
      const std::string variant = use_prune ? "prune" : "noprune";
      for (const auto& metric : metrics) {
        double value = 0.0;
        if (metric == "relfrob") {
          value = relative_frobenius_error(fit.theta_hat.theta(), theta.theta());
        } else if (metric == "rowwise") {
          value = max_rowwise_relative_error(fit.theta_hat, theta.theta()).max_relative_error;
        } else if (metric == "rc") {
          value = rc_avg(fit.theta_hat.theta(), theta.theta());
        } else {
          throw ValueError("run_experiment: unknown metric " + metric);
        }
        rows.push_back({point.sweep_label, seed, variant, metric, value});
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  const auto points = preset_points(config.preset, config.n);
  const bool diagnostic = config.preset == "prune-diag";
  if (config.seeds.empty()) throw ValueError("run_experiment: no seeds");
  if (config.metrics.empty()) throw ValueError("run_experiment: no metrics");

  std::vector<Job> jobs;
  for (size_t p = 0; p < points.size(); ++p)
    for (size_t s = 0; s < config.seeds.size(); ++s) jobs.push_back({p, s});

  // One result slot per job keeps output deterministic under any schedule.
  std::vector<std::vector<ExperimentRow>> slots(jobs.size());
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                              : std::min<unsigned>(hw, 8);
  auto work = [&] {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        slots[j] = run_point_seed(points[jobs[j].point], config.seeds[jobs[j].seed_idx],
                                  diagnostic, config.metrics);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1 || jobs.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<ExperimentRow> rows;
  for (auto& slot : slots)
    for (auto& row : slot) rows.push_back(std::move(row));
  return rows;
}

void write_experiment_csv(const std::string& path, const ExperimentConfig& config,
                          const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ValueError("write_experiment_csv: cannot open " + path);
  std::istringstream cfg(config.serialize());
  std::string line;
  while (std::getline(cfg, line)) out << "# " << line << "\n";
  out << "sweep,seed,variant,metric,value\n";
  for (const auto& row : rows)
    out << row.sweep << "," << row.seed << "," << row.variant << "," << row.metric << ","
        << format_double(row.value) << "\n";
  if (!out) throw ValueError("write_experiment_csv: write failed for " + path);
}

}  // namespace spacl
