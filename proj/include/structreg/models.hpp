#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "structreg/corpus.hpp"
#include "structreg/decompose.hpp"
#include "structreg/features.hpp"

namespace structreg {

struct Model {
  ParamLayout layout;
  std::vector<double> weights;
  AlphabetPtr labels;
  AlphabetPtr features;
  TemplateSet templates;

  /// Zero weights over the layout implied by the alphabets.
  static Model zeros(AlphabetPtr labels, AlphabetPtr features, TemplateSet templates);

  std::size_t num_labels() const noexcept { return layout.num_labels(); }
};

/// Weights as scale * values; the trainer keeps L2 shrinkage in `scale`.
struct WeightsView {
  std::span<const double> values;
  double scale = 1.0;
  double operator[](std::size_t i) const noexcept { return scale * values[i]; }
};

inline WeightsView view_of(const Model& m) { return {m.weights, 1.0}; }

/// Sparse vector with strictly increasing indices.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// Scores and log-space forward/backward tables for one sequence.
/// Edge scores exist for k = 1..n-1 (transition into position k); position 0
/// has node scores only, which is the begin-of-sequence state.
class Lattice {
 public:
  Lattice() = default;
  Lattice(std::size_t n, std::size_t labels);

  std::size_t length() const noexcept { return n_; }
  std::size_t num_labels() const noexcept { return y_; }

  double& node(std::size_t k, std::size_t y) { return node_[k * y_ + y]; }
  double node(std::size_t k, std::size_t y) const { return node_[k * y_ + y]; }
  /// Score of moving from label p at k-1 to label y at k; requires k >= 1.
  double& edge(std::size_t k, std::size_t p, std::size_t y) {
    return edge_[((k - 1) * y_ + p) * y_ + y];
  }
  double edge(std::size_t k, std::size_t p, std::size_t y) const {
    return edge_[((k - 1) * y_ + p) * y_ + y];
  }

  double alpha(std::size_t k, std::size_t y) const { return alpha_[k * y_ + y]; }
  double beta(std::size_t k, std::size_t y) const { return beta_[k * y_ + y]; }
  double log_z() const noexcept { return log_z_; }
  bool inferred() const noexcept { return inferred_; }

  double node_marginal(std::size_t k, std::size_t y) const;
  /// P(y_{k-1} = p, y_k = y); requires k >= 1.
  double pair_marginal(std::size_t k, std::size_t p, std::size_t y) const;

  /// Total score of a label path.
  double path_score(std::span<const LabelId> labels) const;

 private:
  friend void forward_backward(Lattice& lat);
  std::size_t n_ = 0, y_ = 0;
  std::vector<double> node_, edge_, alpha_, beta_;
  double log_z_ = 0.0;
  bool inferred_ = false;
};

Lattice score_lattice(const ParamLayout& layout, WeightsView w,
                      std::span<const FeatureVector> x);
Lattice score_lattice(const Model& model, std::span<const FeatureVector> x);

/// Fills alpha/beta and logZ; throws NumericalError naming the position of a NaN.
void forward_backward(Lattice& lat);

struct LossGrad {
  double loss = 0.0;
  SparseVector grad;  // expected minus observed feature counts
};

/// Negative log-likelihood of z.gold and its gradient. `add(index, value)` is
/// called once per (parameter, position) contribution, unmerged.
template <class Add>
double crf_loss_grad_into(const ParamLayout& layout, WeightsView w, const SequenceView& z,
                          Add&& add);

LossGrad crf_loss_grad(const Model& model, const SequenceView& z);
double crf_loss(const ParamLayout& layout, WeightsView w, const SequenceView& z);

struct Decoded {
  std::vector<LabelId> labels;
  double score = 0.0;
};

/// Max-score path; ties go to the lowest label id at every decision.
Decoded viterbi(const Lattice& lat);
Decoded viterbi(const Model& model, std::span<const FeatureVector> x);

/// Feature vector of a label path, as parameter indices with values, merged.
SparseVector path_features(const ParamLayout& layout, std::span<const FeatureVector> x,
                           std::span<const LabelId> labels);

/// Running sums for the uniform average of weights over update steps,
/// using the lag-sum identity avg = w_T - (1/T) * sum_s (s-1) * delta_s.
class WeightAverager {
 public:
  explicit WeightAverager(std::size_t size = 0) : lagged_(size, 0.0) {}
  void begin_step() noexcept { ++steps_; }
  void record(std::size_t index, double delta) noexcept {
    lagged_[index] += static_cast<double>(steps_ - 1) * delta;
  }
  std::size_t steps() const noexcept { return steps_; }
  /// Uniform average given the current (final) weights.
  std::vector<double> average(std::span<const double> current) const;

 private:
  std::vector<double> lagged_;
  std::size_t steps_ = 0;
};

/// Viterbi decode then, on a mistake, w += eta * (phi(gold) - phi(pred)).
/// Returns the Hamming distance between prediction and gold.
std::size_t perceptron_update(Model& model, const SequenceView& z, double eta,
                              WeightAverager* averager = nullptr);

/// Posterior of the gold label at position k (the per-position real-valued
/// output used by the stability probes).
double stability_value(const Model& model, const SequenceView& z, std::size_t k);
double stability_value(const Lattice& inferred, const SequenceView& z, std::size_t k);

// Model file: "SRMD", u32 version, dims and flags, templates, label and
// feature alphabets as length-prefixed UTF-8 lists, then weights as
// little-endian float64.
std::string serialize_model(const Model& model);
Model deserialize_model(std::string_view bytes);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace structreg

#include "structreg/models_impl.hpp"
