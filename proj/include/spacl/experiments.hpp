#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spacl/estimator.hpp"
#include "spacl/model.hpp"

namespace spacl {

/// A named experiment: sweep points, seeds, and the SPACL variants to run.
/// Reproducible from (preset, n, seeds) alone.
struct ExperimentConfig {
  std::string preset;
  std::int64_t n = 0;  // 0 = preset default
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> metrics = {"relfrob"};  // relfrob | rowwise | rc
  int threads = 0;  // 0 = hardware concurrency

  std::string serialize() const;  // key=value lines
  static ExperimentConfig parse(const std::string& text);
};

struct ExperimentRow {
  std::string sweep;
  std::uint64_t seed = 0;
  std::string variant;  // prune | noprune | diag
  std::string metric;   // relfrob | s0_fraction | m
  double value = 0.0;
};

struct PresetPoint {
  std::string sweep_label;
  double sweep_value = 0.0;
  std::function<ModelParams(std::int64_t n)> make_params;
  std::int64_t n = 0;  // resolved node count for this point
};

/// fig1b, fig2a, fig2b, fig2c, fig2d, suppK, suppAlpha, prune-diag.
std::vector<std::string> preset_names();
std::int64_t preset_default_n(const std::string& preset);
std::vector<PresetPoint> preset_points(const std::string& preset, std::int64_t n_override);

/// Runs every (sweep point, seed) job, SPACL with and without pruning for
/// the estimation presets and the pruning safety census for
/// prune-diag. Rows come back sorted by (point, seed, variant, metric).
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

/// CSV with the config embedded as '#' comments; byte-identical across runs
/// of the same config.
void write_experiment_csv(const std::string& path, const ExperimentConfig& config,
                          const std::vector<ExperimentRow>& rows);

}  // namespace spacl
