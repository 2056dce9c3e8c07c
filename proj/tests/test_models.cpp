#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "structreg/errors.hpp"
#include "structreg/models.hpp"

using namespace structreg;

namespace {

WeightsView wv(const std::vector<double>& w) { return {w, 1.0}; }

Model tiny_model(std::size_t d, std::size_t Y, bool rich) {
  std::vector<std::string> labels, feats;
  for (std::size_t y = 0; y < Y; ++y) labels.push_back("L" + std::to_string(y));
  for (std::size_t f = 0; f < d; ++f) feats.push_back("f" + std::to_string(f));
  TemplateSet t;
  t.use_rich_edge = rich;
  return Model::zeros(std::make_shared<Alphabet>(labels), std::make_shared<Alphabet>(feats), t);
}

}  // namespace

TEST_CASE("zero weights give zero scores") {
  std::mt19937_64 gen(1);
  auto in = oracle::random_instance(gen, 4, 3, 5, true);
  std::fill(in.w.begin(), in.w.end(), 0.0);
  const auto lat = score_lattice(in.layout, wv(in.w), in.x);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t y = 0; y < 3; ++y) {
      CHECK(lat.node(k, y) == 0.0);
      if (k > 0)
        for (std::size_t p = 0; p < 3; ++p) CHECK(lat.edge(k, p, y) == 0.0);
    }
}

TEST_CASE("single node weight") {
  ParamLayout L(2, 3, false);
  std::vector<double> w(L.total(), 0.0);
  w[L.node(0, 1)] = 2.0;
  std::vector<FeatureVector> x{{{0, 1.0}}, {{1, 1.0}}};
  const auto lat = score_lattice(L, wv(w), x);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t y = 0; y < 3; ++y) CHECK(lat.node(k, y) == (k == 0 && y == 1 ? 2.0 : 0.0));
}

TEST_CASE("lattice scores match a naive scorer") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    auto in = oracle::random_instance(gen, 1 + t % 5, 2 + t % 3, 6, t % 2 == 0);
    const auto lat = score_lattice(in.layout, wv(in.w), in.x);
    oracle::for_each_path(in.x.size(), in.layout.num_labels(), [&](const std::vector<LabelId>& y) {
      CHECK(std::abs(lat.path_score(y) - oracle::path_score(in.layout, in.w, in.x, y)) < 1e-12);
    });
  }
}

TEST_CASE("out of range feature id is a layout error") {
  ParamLayout L(2, 2, false);
  std::vector<double> w(L.total(), 0.0);
  std::vector<FeatureVector> x{{{5, 1.0}}};
  CHECK_THROWS_AS(score_lattice(L, wv(w), x), LayoutError);
}

TEST_CASE("uniform potentials") {
  ParamLayout L(1, 2, false);
  std::vector<double> w(L.total(), 0.0);
  std::vector<FeatureVector> x(2, FeatureVector{{0, 1.0}});
  auto lat = score_lattice(L, wv(w), x);
  forward_backward(lat);
  CHECK(lat.log_z() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("forward-backward against enumeration") {
  std::mt19937_64 gen(3);
  auto in = oracle::random_instance(gen, 3, 3, 4, true);
  auto lat = score_lattice(in.layout, wv(in.w), in.x);
  forward_backward(lat);
  const auto e = oracle::enumerate(in.layout, in.w, in.x);
  CHECK(oracle::rel_err(lat.log_z(), e.log_z) < 1e-10);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t y = 0; y < 3; ++y) {
      CHECK(std::abs(lat.node_marginal(k, y) - e.node[k][y]) < 1e-9);
      if (k > 0)
        for (std::size_t p = 0; p < 3; ++p)
          CHECK(std::abs(lat.pair_marginal(k, p, y) - e.pair[k][p][y]) < 1e-9);
    }
}

TEST_CASE("large scores stay finite") {
  std::mt19937_64 gen(4);
  auto in = oracle::random_instance(gen, 30, 4, 5, true, 200.0);
  auto lat = score_lattice(in.layout, wv(in.w), in.x);
  forward_backward(lat);
  CHECK(std::isfinite(lat.log_z()));
  double sum = 0.0;
  for (std::size_t y = 0; y < 4; ++y) sum += lat.node_marginal(17, y);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("NaN score is reported with its position") {
  ParamLayout L(1, 2, false);
  std::vector<double> w(L.total(), 0.0);
  w[L.node(0, 1)] = std::nan("");
  std::vector<FeatureVector> x{{}, {{0, 1.0}}};
  auto lat = score_lattice(L, wv(w), x);
  try {
    forward_backward(lat);
    FAIL("no exception");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("position 1") != std::string::npos);
  }
}

TEST_CASE("loss at zero weights on one position") {
  ParamLayout L(1, 4, false);
  std::vector<double> w(L.total(), 0.0);
  std::vector<FeatureVector> x{{{0, 1.0}}};
  std::vector<LabelId> g{2};
  CHECK(crf_loss(L, wv(w), {x, g}) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("loss matches enumeration and gradient matches finite differences") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    auto in = oracle::random_instance(gen, 1 + t % 4, 2 + t % 2, 3, t % 2 == 1);
    const SequenceView z{in.x, in.gold};
    Model m;
    m.layout = in.layout;
    m.weights = in.w;
    const auto lg = crf_loss_grad(m, z);
    CHECK(oracle::rel_err(lg.loss, oracle::nll(in.layout, in.w, in.x, in.gold)) < 1e-10);
    std::vector<double> g(in.w.size(), 0.0);
    for (const auto& [i, v] : lg.grad) g[i] = v;
    const double h = 1e-4;
    for (std::size_t i = 0; i < in.w.size(); ++i) {
      auto wp = in.w, wm = in.w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (crf_loss(in.layout, wv(wp), z) - crf_loss(in.layout, wv(wm), z)) / (2 * h);
      CHECK(std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-3}) < 1e-6);
    }
  }
}

TEST_CASE("loss is convex along random lines") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    auto in = oracle::random_instance(gen, 4, 3, 4, true);
    std::vector<double> dir(in.w.size());
    for (auto& v : dir) v = normal(gen);
    auto at = [&](double s) {
      auto w = in.w;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * dir[i];
      return crf_loss(in.layout, wv(w), {in.x, in.gold});
    };
    for (double s = -2.0; s <= 2.0; s += 0.5) CHECK(at(s) <= 0.5 * (at(s - 0.5) + at(s + 0.5)) + 1e-12);
  }
}

TEST_CASE("viterbi") {
  SUBCASE("zero weights pick label 0 everywhere") {
    ParamLayout L(2, 3, true);
    std::vector<double> w(L.total(), 0.0);
    std::vector<FeatureVector> x(5, FeatureVector{{1, 1.0}});
    const auto d = viterbi(score_lattice(L, wv(w), x));
    CHECK(d.labels == std::vector<LabelId>(5, 0));
    CHECK(d.score == 0.0);
  }
  SUBCASE("brute force argmax, exact score") {
    std::mt19937_64 gen(7);
    for (int t = 0; t < 30; ++t) {
      auto in = oracle::random_instance(gen, 4, 3, 4, t % 2 == 0);
      const auto lat = score_lattice(in.layout, wv(in.w), in.x);
      const auto d = viterbi(lat);
      CHECK(d.score == lat.path_score(d.labels));
      if (oracle::unique_max(in.layout, in.w, in.x))
        CHECK(d.labels == oracle::enumerate(in.layout, in.w, in.x).argmax);
    }
  }
}

TEST_CASE("perceptron update") {
  auto m = tiny_model(2, 3, true);
  std::vector<FeatureVector> x{{{0, 1.0}, {1, 0.5}}};
  std::vector<LabelId> gold{2};

  SUBCASE("correct prediction leaves the model unchanged") {
    m.weights[m.layout.node(0, 2)] = 1.0;
    const auto before = m.weights;
    CHECK(perceptron_update(m, {x, gold}, 1.0) == 0);
    CHECK(m.weights == before);
  }
  SUBCASE("single position mistake moves exactly four weights") {
    const double eta = 0.7;
    CHECK(perceptron_update(m, {x, gold}, eta) == 1);  // predicts label 0
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      double expect = 0.0;
      if (i == m.layout.node(0, 2)) expect = eta * 1.0;
      if (i == m.layout.node(1, 2)) expect = eta * 0.5;
      if (i == m.layout.node(0, 0)) expect = -eta * 1.0;
      if (i == m.layout.node(1, 0)) expect = -eta * 0.5;
      CHECK(m.weights[i] == doctest::Approx(expect).epsilon(1e-15));
    }
  }
  SUBCASE("margin grows by eta times squared feature difference") {
    std::mt19937_64 gen(8);
    auto in = oracle::random_instance(gen, 5, 3, 2, true);
    m.weights = in.w;
    const auto pred = viterbi(m, in.x).labels;
    if (pred != in.gold) {
      const double eta = 0.3;
      auto margin = [&] {
        return oracle::path_score(m.layout, m.weights, in.x, in.gold) -
               oracle::path_score(m.layout, m.weights, in.x, pred);
      };
      const double before = margin();
      double sq = 0.0;
      std::vector<double> diff(m.weights.size(), 0.0);
      for (const auto& [i, v] : path_features(m.layout, in.x, in.gold)) diff[i] += v;
      for (const auto& [i, v] : path_features(m.layout, in.x, pred)) diff[i] -= v;
      for (double v : diff) sq += v * v;
      perceptron_update(m, {in.x, in.gold}, eta);
      CHECK(margin() - before == doctest::Approx(eta * sq).epsilon(1e-10));
    }
  }
}

TEST_CASE("weight averaging") {
  SUBCASE("constant weights") {
    WeightAverager a(3);
    std::vector<double> w{1.0, -2.0, 0.5};
    for (int s = 0; s < 5; ++s) a.begin_step();
    CHECK(a.average(w) == w);
  }
  SUBCASE("two steps") {
    WeightAverager a(2);
    std::vector<double> w{0.0, 0.0};
    a.begin_step();
    w[0] += 1.0;
    a.record(0, 1.0);  // w1 = (1, 0)
    a.begin_step();
    w[1] += 4.0;
    a.record(1, 4.0);  // w2 = (1, 4)
    const auto avg = a.average(w);
    CHECK(avg[0] == doctest::Approx(1.0));
    CHECK(avg[1] == doctest::Approx(2.0));
  }
  SUBCASE("lag-sum agrees with stored snapshots") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<std::size_t> idx(0, 9);
    WeightAverager a(10);
    std::vector<double> w(10, 0.0), sum(10, 0.0);
    for (int s = 0; s < 100; ++s) {
      a.begin_step();
      for (int j = 0; j < 3; ++j) {
        const auto i = idx(gen);
        const double d = normal(gen);
        w[i] += d;
        a.record(i, d);
      }
      for (std::size_t i = 0; i < 10; ++i) sum[i] += w[i];
    }
    const auto avg = a.average(w);
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(avg[i] - sum[i] / 100.0) < 1e-12);
  }
}

TEST_CASE("stability value") {
  auto m = tiny_model(3, 4, true);
  std::vector<FeatureVector> x{{{0, 1.0}}, {{1, 1.0}, {2, 1.0}}, {{0, 1.0}}};
  std::vector<LabelId> gold{1, 3, 0};
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(stability_value(m, {x, gold}, k) == doctest::Approx(0.25).epsilon(1e-14));

  std::mt19937_64 gen(10);
  for (int t = 0; t < 10; ++t) {
    auto in = oracle::random_instance(gen, 3, 3, 3, true, 2.0);
    Model r;
    r.layout = in.layout;
    r.weights = in.w;
    const auto e = oracle::enumerate(in.layout, in.w, in.x);
    for (std::size_t k = 0; k < 3; ++k) {
      const double v = stability_value(r, {in.x, in.gold}, k);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(std::abs(v - e.node[k][in.gold[k]]) < 1e-9);
    }
  }
}

TEST_CASE("model file round trip") {
  auto m = tiny_model(4, 3, true);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  for (auto& v : m.weights) v = normal(gen);
  m.weights[0] = -0.0;
  m.weights[1] = 1e-310;
  const auto bytes = serialize_model(m);
  const auto back = deserialize_model(bytes);
  CHECK(back.layout == m.layout);
  CHECK(back.labels->entries() == m.labels->entries());
  CHECK(back.features->entries() == m.features->entries());
  CHECK(back.templates.lines() == m.templates.lines());
  REQUIRE(back.weights.size() == m.weights.size());
  CHECK(std::memcmp(back.weights.data(), m.weights.data(), m.weights.size() * sizeof(double)) == 0);
  CHECK(serialize_model(back) == bytes);

  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 3)), DataError);
  CHECK_THROWS_AS(deserialize_model("XXXX" + bytes.substr(4)), DataError);
}
