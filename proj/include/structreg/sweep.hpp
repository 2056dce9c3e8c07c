#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "structreg/corpus.hpp"
#include "structreg/train.hpp"

namespace structreg {

/// Mini-sample sizes of the standard accuracy/time curves.
inline const std::vector<double> kDefaultMiniGrid = {1.5, 2.5, 3.5, 5.5, 10.5, 15.5, 20.5};

struct SweepConfig {
  /// Mini sizes; 0 is the alpha = 1 baseline.
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
  std::vector<Objective> objectives = {Objective::Crf};
  TrainConfig crf;
  TrainConfig perceptron = perceptron_defaults();
  std::size_t workers = 1;

  /// kDefaultMiniGrid plus the baseline.
  static std::vector<double> default_grid();
};

struct SweepRow {
  Objective objective = Objective::Crf;
  double mini_size = 0.0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
  double train_seconds = 0.0;
  /// "ok", or the error message of a failed cell (value is NaN then).
  std::string status = "ok";
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t cells = 0;
};

/// Metric names produced per cell, in row order.
std::vector<std::string> sweep_metrics(const Dataset& test, const Dataset* dev);

/// Runs grid x seeds x objectives; every cell trains on `train_set` with the
/// cell's (mini size, seed) and is scored on `test` (and `dev` if given).
/// Failed cells produce rows with NaN values and the error as status.
SweepResult run_sweep(const Dataset& train_set, const Dataset* dev, const Dataset& test,
                      const SweepConfig& cfg);

/// Deterministic columns: objective, mini_size, seed, metric, value, status.
void write_sweep_tsv(std::ostream& out, const SweepResult& r);
/// objective, mini_size, seed, train_seconds (one row per cell).
void write_sweep_timing_tsv(std::ostream& out, const SweepResult& r);

std::string objective_name(Objective o);
Objective parse_objective(const std::string& s);

}  // namespace structreg
