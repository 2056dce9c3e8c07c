#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "structreg/corpus.hpp"
#include "structreg/decompose.hpp"
#include "structreg/models.hpp"

namespace structreg {

enum class Objective { Crf, Perceptron };

struct TrainConfig {
  Objective objective = Objective::Crf;
  /// Expected mini-sample length n'; 0 disables structure regularization.
  double mini_size = 0.0;
  /// L2 strength. Each update on z' carries (lambda/2)(|z'|/T)||w||^2, so an
  /// epoch sums to sum NLL(z') + (lambda/2)||w||^2 (T = training tokens).
  double lambda = 1.0;
  double eta0 = 0.03;
  /// Learning rate for epoch e (0-based) is eta0 * decay^e.
  double decay = 0.9;
  std::size_t max_epochs = 100;
  /// Stop when the relative change of the epoch objective drops below this.
  double convergence_threshold = 1e-4;
  std::uint64_t seed = 0;
  bool eval_each_epoch = false;
  bool randomize_phase = true;
  bool refresh_each_epoch = true;

  /// Perceptron step size.
  double perceptron_rate = 1.0;
  /// Perceptron returns averaged weights (the raw ones are kept separately).
  bool average = true;

  /// Keep ||grad g_z'|| / |z'| for every CRF update (kappa estimation).
  bool record_gradients = false;
  /// L2 shrinkage folded into a global scale; false applies it to every
  /// coordinate on every update (slow, for equivalence checks).
  bool lazy_l2 = true;

  /// Templates the data was extracted with; carried into the model file and
  /// deciding whether the layout has an edge block.
  TemplateSet templates = default_templates();

  /// Called with each epoch's mini-sample stream before it is visited.
  std::function<void(const MiniBatchStream&)> on_stream;

  DecompositionPolicy policy() const;
  void validate() const;
};

/// Perceptron protocol: 10 epochs, averaged weights, lambda unused.
TrainConfig perceptron_defaults();

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  /// CRF: (1/T) * (sum NLL(z') + (lambda/2)||w||^2) at the end-of-epoch
  /// weights, over the epoch-0 decomposition (for alpha = 1, exactly R_lambda).
  /// Convergence is tested on this value. Perceptron: mistakes per token.
  double objective = 0.0;
  /// CRF: the same sum accumulated during the epoch, each term at the weights
  /// of its own update, over that epoch's decomposition.
  double online_objective = 0.0;
  double train_accuracy = std::numeric_limits<double>::quiet_NaN();
  double dev_accuracy = std::numeric_limits<double>::quiet_NaN();
  /// Training time only; evaluation is excluded.
  double seconds = 0.0;
  double learning_rate = 0.0;
  std::size_t updates = 0;
};

struct GradientRecord {
  double norm = 0.0;
  std::size_t size = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> converged_at;
  std::size_t total_updates = 0;
  std::vector<GradientRecord> gradients;

  double final_objective() const { return epochs.empty() ? 0.0 : epochs.back().objective; }
  double total_seconds() const { return epochs.empty() ? 0.0 : epochs.back().seconds; }
};

struct TrainOutcome {
  Model model;
  TrainReport report;
  /// Last raw perceptron weights (empty for CRF).
  std::vector<double> final_weights;
};

/// Algorithm: every epoch decompose the training set afresh, visit the
/// shuffled mini-samples once, and take an SGD (CRF) or perceptron step on
/// each. Deterministic in cfg.seed.
TrainOutcome train(const Dataset& train_set, const Dataset* dev, const TrainConfig& cfg);

/// (1/T) * (sum over the stream of NLL(z') + (lambda/2)||w||^2) at fixed w.
double regularized_objective(const Model& model, const Dataset& ds,
                             const MiniBatchStream& stream, double lambda);

struct EpochsToTolerance {
  static constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  std::size_t epochs = kNever;
  double reference = 0.0;
  /// Wall-clock to the convergence epoch of the reference run.
  double seconds_to_convergence = std::numeric_limits<double>::infinity();
  std::size_t converged_at = kNever;
};

/// Trains to convergence, takes the final objective as the optimum, and
/// returns the first epoch whose objective is within epsilon_rel of it.
EpochsToTolerance measure_epochs_to_tolerance(const Dataset& ds, const TrainConfig& cfg,
                                              double epsilon_rel);

// Report files: JSON lines (one object per epoch, with wall-clock) and TSV
// (deterministic columns only; timings go to write_report_timing_tsv).
void write_report_jsonl(std::ostream& out, const TrainReport& report);
void write_report_tsv(std::ostream& out, const TrainReport& report);
void write_report_timing_tsv(std::ostream& out, const TrainReport& report);

}  // namespace structreg
