#include <cmath>

#include "doctest.h"
#include "structreg/errors.hpp"
#include "structreg/theory.hpp"

using namespace structreg;

namespace {

TheoryParams example() {
  TheoryParams p;
  p.d = 2;
  p.tau = 1;
  p.rho = 1;
  p.v = 1;
  p.n = 4;
  p.m = 10;
  p.lambda = 0.5;
  p.alpha = 2;
  p.gamma = 1;
  p.delta = 0.1;
  return p;
}

}  // namespace

TEST_CASE("stability bounds") {
  auto p = example();
  const auto b = stability_bounds(p);
  CHECK(b.delta_fn == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(b.delta_fn_bar == doctest::Approx(3.2).epsilon(1e-15));

  p.tau = 3;
  const auto t = stability_bounds(p);
  CHECK(t.delta_loss == doctest::Approx(3 * t.delta_fn).epsilon(1e-15));
  CHECK(t.delta_sample == doctest::Approx(4 * 3 * t.delta_fn).epsilon(1e-15));

  auto q = example();
  q.alpha = 4;
  const auto d = stability_bounds(q);
  CHECK(d.delta_fn == doctest::Approx(b.delta_fn / 4).epsilon(1e-15));
  CHECK(d.delta_fn_bar == doctest::Approx(b.delta_fn_bar / 2).epsilon(1e-15));

  q.alpha = 1;
  CHECK(stability_bounds(q).delta_fn_bar == stability_bounds(q).delta_fn);

  q.alpha = 5;  // > n
  CHECK_THROWS_AS(stability_bounds(q), ConfigError);
}

TEST_CASE("generalization bound") {
  auto p = example();
  const auto g = generalization_bound(p, 0.0);
  CHECK(g.overfit == doctest::Approx(47.99904080166464).epsilon(1e-13));
  CHECK(g.bound == g.overfit);
  CHECK(generalization_bound(p, 0.25).bound == doctest::Approx(g.bound + 0.25).epsilon(1e-15));

  double prev = INFINITY;
  for (double a = 1.0; a <= 4.0; a += 0.5) {
    p.alpha = a;
    const double b = generalization_bound(p, 0.1).bound;
    CHECK(b < prev);
    prev = b;
  }

  p = example();
  p.lambda = 1e12;
  const double limit = p.gamma * std::sqrt(std::log(1.0 / p.delta) / (2.0 * p.m));
  CHECK(generalization_bound(p, 0.1).bound == doctest::Approx(0.1 + limit).epsilon(1e-9));
  CHECK_THROWS_AS(generalization_bound(p, -1.0), ConfigError);
}

TEST_CASE("SGD iteration count") {
  SgdTheoryParams s;
  s.q = 1;
  s.kappa = 1;
  s.a0 = 1;
  s.epsilon = 0.1;
  s.beta = 1;
  s.c = 1;
  const auto r = sgd_iterations(s, 10, 2);
  CHECK(r.eta == doctest::Approx(0.004).epsilon(1e-14));
  CHECK(r.t_min == doctest::Approx(575.6462732485114).epsilon(1e-13));
  for (double a : {1.0, 3.0, 7.5})
    CHECK(sgd_iterations(s, 10, a).t_min * a * a == doctest::Approx(r.t_min * 4).epsilon(1e-13));

  s.epsilon = 1.0;  // epsilon >= q a0
  CHECK(sgd_iterations(s, 10, 2).t_min == 0.0);

  s = SgdTheoryParams{};
  s.c = 10;
  s.epsilon = 1;
  CHECK_THROWS_AS(sgd_iterations(s, 1, 1), ConfigError);  // eta * c = 100
}

TEST_CASE("kappa estimate") {
  CHECK(estimate_kappa({}) == 0.0);
  std::vector<GradientRecord> zeros{{0.0, 3}, {0.0, 5}};
  CHECK(estimate_kappa(zeros) == 0.0);
  std::vector<GradientRecord> one{{6.0, 3}};
  CHECK(estimate_kappa(one) == 2.0);
  std::vector<GradientRecord> many{{6.0, 3}, {1.0, 4}, {9.0, 2}, {2.0, 2}};
  double prev = estimate_kappa(many);
  while (!many.empty()) {
    many.pop_back();
    const double k = estimate_kappa(many);
    CHECK(k <= prev);
    prev = k;
  }
}

TEST_CASE("stability probe") {
  SynthSpec spec;
  spec.num_labels = 3;
  spec.vocab_size = 20;
  spec.mean_length = 6;
  spec.num_samples = 15;
  const auto tpl = parse_templates("U:w[0]\nU:w[-1]\nE:rich");
  const auto tr = extract(generate_synthetic(spec), tpl, false);
  spec.num_samples = 5;
  const auto te = extract_frozen(generate_synthetic(spec, 1), tpl, tr.features);
  TrainConfig cfg;
  cfg.templates = tpl;
  cfg.max_epochs = 5;
  cfg.mini_size = 2.5;

  SUBCASE("removal then re-adding in order changes nothing") {
    const auto a = train(tr, nullptr, cfg);
    auto rebuilt = without_sample(tr, 4);
    rebuilt.samples.insert(rebuilt.samples.begin() + 4, tr.samples[4]);
    const auto b = train(rebuilt, nullptr, cfg);
    std::vector<PositionRef> refs;
    for (std::size_t s = 0; s < te.size(); ++s)
      for (std::size_t k = 0; k < te.samples[s].length(); ++k) refs.push_back({s, k});
    CHECK(stability_values(a.model, te, refs) == stability_values(b.model, te, refs));
  }
  SUBCASE("probe values are bounded and deterministic") {
    ProbeOptions o;
    o.num_removals = 4;
    o.probe_points = 10;
    o.workers = 2;
    const auto p = probe_stability(tr, te, cfg, o);
    CHECK(p.removals.size() == 4);
    CHECK(p.probe_positions == 10);
    for (const auto& r : p.removals) {
      CHECK(r.delta_max >= 0.0);
      CHECK(r.delta_max <= 1.0);
      CHECK(r.delta_mean <= r.delta_max);
    }
    CHECK(p.median_delta_max <= p.delta_max);
    o.workers = 1;
    const auto q = probe_stability(tr, te, cfg, o);
    CHECK(q.median_delta_max == p.median_delta_max);
    CHECK(q.delta_mean == p.delta_mean);
  }
}
