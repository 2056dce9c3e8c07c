#include "structreg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "structreg/errors.hpp"
#include "structreg/parallel.hpp"

namespace structreg {

void TheoryParams::validate() const {
  for (double x : {d, tau, rho, v, n, m, lambda, alpha, gamma, delta})
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("theory parameters must be positive and finite");
  if (alpha < 1.0 || alpha > n) throw ConfigError("alpha must lie in [1, n]");
  if (delta >= 1.0) throw ConfigError("delta must lie in (0, 1)");
}

void SgdTheoryParams::validate() const {
  for (double x : {c, q, kappa, epsilon, beta, a0})
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("SGD theory parameters must be positive and finite");
  if (beta > 1.0) throw ConfigError("beta must lie in (0, 1]");
}

StabilityBounds stability_bounds(const TheoryParams& p) {
  p.validate();
  const double base = p.d * p.rho * p.rho * p.v * p.v * p.n * p.n / (p.m * p.lambda * p.alpha * p.alpha);
  StabilityBounds b;
  b.delta_fn = p.tau * base;
  b.delta_loss = p.tau * p.tau * base;
  b.delta_sample = p.n * p.tau * p.tau * base;
  b.delta_fn_bar = p.alpha * b.delta_fn;
  b.delta_loss_bar = p.alpha * b.delta_loss;
  b.delta_sample_bar = p.alpha * b.delta_sample;
  return b;
}

GeneralizationBound generalization_bound(const TheoryParams& p, double empirical_risk) {
  p.validate();
  if (!(empirical_risk >= 0.0)) throw ConfigError("empirical risk must be >= 0");
  const double a = p.d * p.tau * p.tau * p.rho * p.rho * p.v * p.v * p.n * p.n /
                   (p.m * p.lambda * p.alpha);
  const double log_term = std::log(1.0 / p.delta);
  const double root = std::sqrt(log_term / (2.0 * p.m));
  GeneralizationBound g;
  g.overfit = 2.0 * a + ((4.0 * p.m - 2.0) * a + p.gamma) * root;
  g.bound = empirical_risk + g.overfit;
  g.simplified_overfit = p.d * p.n * p.n * std::sqrt(log_term) / (p.lambda * p.alpha * std::sqrt(p.m));
  return g;
}

SgdIterations sgd_iterations(const SgdTheoryParams& p, double n, double alpha) {
  p.validate();
  if (!(n >= 1.0) || !(alpha >= 1.0) || alpha > n) throw ConfigError("need 1 <= alpha <= n");
  SgdIterations r;
  const double spread = p.q * p.kappa * p.kappa * n * n;
  r.eta = p.c * p.epsilon * p.beta * alpha * alpha / spread;
  if (r.eta * p.c >= 1.0)
    throw ConfigError("prescribed learning rate violates eta*c < 1 (eta*c = " +
                      std::to_string(r.eta * p.c) + "); plain gradient descent would diverge");
  const double ratio = p.q * p.a0 / p.epsilon;
  r.t_min = ratio > 1.0 ? spread * std::log(ratio) /
                              (p.epsilon * p.beta * p.c * p.c * alpha * alpha)
                        : 0.0;
  return r;
}

double estimate_kappa(std::span<const GradientRecord> records) {
  double k = 0.0;
  for (const auto& r : records)
    if (r.size > 0) k = std::max(k, r.norm / static_cast<double>(r.size));
  return k;
}

std::vector<double> stability_values(const Model& model, const Dataset& probe_set,
                                     std::span<const PositionRef> positions) {
  std::map<std::size_t, std::vector<std::size_t>> by_sample;
  for (std::size_t i = 0; i < positions.size(); ++i) by_sample[positions[i].sample].push_back(i);
  std::vector<double> out(positions.size());
  for (const auto& [sample, refs] : by_sample) {
    const auto z = view_of(probe_set.samples[sample]);
    auto lat = score_lattice(model, z.x);
    forward_backward(lat);
    for (auto i : refs) out[i] = stability_value(lat, z, positions[i].position);
  }
  return out;
}

StabilityProbe probe_stability(const Dataset& train_set, const Dataset& probe_set,
                               const TrainConfig& cfg, const ProbeOptions& opts) {
  if (train_set.size() < 2) throw DataError("stability probe needs at least two training samples");
  Rng rng(mix_seed({opts.seed, 0x50524F42ULL}));

  std::vector<PositionRef> all;
  for (std::size_t s = 0; s < probe_set.size(); ++s)
    for (std::size_t k = 0; k < probe_set.samples[s].length(); ++k) all.push_back({s, k});
  if (opts.probe_points > 0 && opts.probe_points < all.size()) {
    rng.shuffle(all);
    all.resize(opts.probe_points);
    std::sort(all.begin(), all.end(), [](const PositionRef& a, const PositionRef& b) {
      return a.sample != b.sample ? a.sample < b.sample : a.position < b.position;
    });
  }

  std::vector<std::size_t> candidates(train_set.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  rng.shuffle(candidates);
  candidates.resize(std::min(opts.num_removals, candidates.size()));

  const auto full = train(train_set, nullptr, cfg);
  const auto reference = stability_values(full.model, probe_set, all);

  StabilityProbe probe;
  probe.probe_positions = all.size();
  probe.removals.resize(candidates.size());
  parallel_for(candidates.size(), opts.workers, [&](std::size_t r) {
    const auto reduced = train(without_sample(train_set, candidates[r]), nullptr, cfg);
    const auto values = stability_values(reduced.model, probe_set, all);
    RemovalProbe rp;
    rp.removed = candidates[r];
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double diff = std::abs(values[i] - reference[i]);
      rp.delta_max = std::max(rp.delta_max, diff);
      sum += diff;
    }
    rp.delta_mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    probe.removals[r] = rp;
  });

  std::vector<double> maxima;
  double mean_sum = 0.0;
  for (const auto& rp : probe.removals) {
    probe.delta_max = std::max(probe.delta_max, rp.delta_max);
    mean_sum += rp.delta_mean;
    maxima.push_back(rp.delta_max);
  }
  if (!maxima.empty()) {
    probe.delta_mean = mean_sum / static_cast<double>(maxima.size());
    std::sort(maxima.begin(), maxima.end());
    const auto h = maxima.size() / 2;
    probe.median_delta_max = maxima.size() % 2 ? maxima[h] : 0.5 * (maxima[h - 1] + maxima[h]);
  }
  return probe;
}

}  // namespace structreg
