#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "structreg/corpus.hpp"
#include "structreg/train.hpp"

namespace structreg {

/// Constants of the stability and generalization bounds.
struct TheoryParams {
  double d = 1.0;       // feature dimension
  double tau = 1.0;     // smoothness of the point-wise loss
  double rho = 1.0;     // admissibility constant
  double v = 1.0;       // bound on local feature values
  double n = 1.0;       // structure complexity
  double m = 1.0;       // training set size
  double lambda = 1.0;  // L2 strength
  double alpha = 1.0;   // structure regularization strength, in [1, n]
  double gamma = 1.0;   // bound on the point-wise loss
  double delta = 0.05;  // confidence, in (0, 1)

  void validate() const;
};

/// Constants of the SGD convergence analysis.
struct SgdTheoryParams {
  double c = 1.0;        // strong convexity modulus
  double q = 1.0;        // Lipschitz constant of the gradient
  double kappa = 1.0;    // ||grad g_z|| <= kappa |z|
  double epsilon = 0.1;  // target tolerance
  double beta = 1.0;     // in (0, 1]
  double a0 = 1.0;       // ||w_0 - w*||^2

  void validate() const;
};

struct StabilityBounds {
  // Removing one mini-sample.
  double delta_fn = 0.0;      // d tau rho^2 v^2 n^2 / (m lambda alpha^2)
  double delta_loss = 0.0;    // tau * delta_fn
  double delta_sample = 0.0;  // n * tau * delta_fn
  // Removing one full sample: each of the above times alpha.
  double delta_fn_bar = 0.0;
  double delta_loss_bar = 0.0;
  double delta_sample_bar = 0.0;
};

StabilityBounds stability_bounds(const TheoryParams& p);

struct GeneralizationBound {
  /// R_e + 2A + ((4m - 2)A + gamma) sqrt(ln(1/delta) / (2m)),
  /// with A = d tau^2 rho^2 v^2 n^2 / (m lambda alpha).
  double bound = 0.0;
  /// Everything but R_e.
  double overfit = 0.0;
  /// d n^2 sqrt(ln(1/delta)) / (lambda alpha sqrt(m)): the leading-order
  /// term with its unknown constant taken as 1.
  double simplified_overfit = 0.0;
};

GeneralizationBound generalization_bound(const TheoryParams& p, double empirical_risk);

struct SgdIterations {
  double t_min = 0.0;  // q kappa^2 n^2 ln(q a0 / eps) / (eps beta c^2 alpha^2), or 0
  double eta = 0.0;    // c eps beta alpha^2 / (q kappa^2 n^2)
};

/// Throws ConfigError when the prescribed rate violates eta * c < 1.
SgdIterations sgd_iterations(const SgdTheoryParams& p, double n, double alpha);

/// max over updates of ||grad g_z'|| / |z'|; 0 for an empty stream.
double estimate_kappa(std::span<const GradientRecord> records);

struct RemovalProbe {
  std::size_t removed = 0;  // index into the training set
  double delta_max = 0.0;
  double delta_mean = 0.0;
};

struct StabilityProbe {
  std::vector<RemovalProbe> removals;
  std::size_t probe_positions = 0;
  double delta_max = 0.0;          // over all removals and positions
  double delta_mean = 0.0;         // mean of per-removal means
  double median_delta_max = 0.0;   // median of per-removal maxima
};

struct ProbeOptions {
  /// Held-out positions sampled for the comparison; 0 = all.
  std::size_t probe_points = 0;
  std::size_t num_removals = 20;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Trains f on S and f^{\i} on S without sample i for randomly chosen i
/// (same config), and compares the gold-label posteriors of the two models
/// on held-out positions.
StabilityProbe probe_stability(const Dataset& train_set, const Dataset& probe_set,
                               const TrainConfig& cfg, const ProbeOptions& opts);

struct PositionRef {
  std::size_t sample = 0;
  std::size_t position = 0;
};
/// Gold-label posterior of `model` at each referenced held-out position.
std::vector<double> stability_values(const Model& model, const Dataset& probe_set,
                                     std::span<const PositionRef> positions);

}  // namespace structreg
