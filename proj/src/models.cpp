#include "structreg/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "binary_io.hpp"
#include "structreg/errors.hpp"

namespace structreg {

namespace {

double log_sum_exp(const double* v, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

SparseVector merge_sorted(std::vector<std::pair<std::size_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector out;
  for (const auto& e : entries) {
    if (!out.empty() && out.back().first == e.first) out.back().second += e.second;
    else out.push_back(e);
  }
  return out;
}

}  // namespace

Model Model::zeros(AlphabetPtr labels, AlphabetPtr features, TemplateSet templates) {
  Model m;
  m.layout = ParamLayout(features->size(), labels->size(), templates.use_rich_edge);
  m.weights.assign(m.layout.total(), 0.0);
  m.labels = std::move(labels);
  m.features = std::move(features);
  m.templates = std::move(templates);
  return m;
}

Lattice::Lattice(std::size_t n, std::size_t labels)
    : n_(n),
      y_(labels),
      node_(n * labels, 0.0),
      edge_(n > 0 ? (n - 1) * labels * labels : 0, 0.0) {}

double Lattice::node_marginal(std::size_t k, std::size_t y) const {
  return std::exp(alpha(k, y) + beta(k, y) - log_z_);
}

double Lattice::pair_marginal(std::size_t k, std::size_t p, std::size_t y) const {
  return std::exp(alpha(k - 1, p) + edge(k, p, y) + node(k, y) + beta(k, y) - log_z_);
}

double Lattice::path_score(std::span<const LabelId> labels) const {
  if (labels.size() != n_) throw DataError("path length does not match lattice");
  if (n_ == 0) return 0.0;
  double s = node(0, labels[0]);
  for (std::size_t k = 1; k < n_; ++k) s = s + edge(k, labels[k - 1], labels[k]) + node(k, labels[k]);
  return s;
}

Lattice score_lattice(const ParamLayout& layout, WeightsView w,
                      std::span<const FeatureVector> x) {
  const std::size_t n = x.size();
  const std::size_t labels = layout.num_labels();
  Lattice lat(n, labels);
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& f : x[k]) {
      if (f.id >= layout.num_features())
        throw LayoutError("feature id " + std::to_string(f.id) + " outside layout of " +
                          std::to_string(layout.num_features()));
      const std::size_t base = layout.node(f.id, 0);
      for (std::size_t y = 0; y < labels; ++y) lat.node(k, y) += w[base + y] * f.value;
    }
    if (k == 0) continue;
    for (std::size_t p = 0; p < labels; ++p)
      for (std::size_t y = 0; y < labels; ++y) lat.edge(k, p, y) = w[layout.trans(p, y)];
    if (layout.rich_edges()) {
      for (const auto& f : x[k]) {
        const std::size_t base = layout.edge_row(f.id);
        for (std::size_t p = 0; p < labels; ++p)
          for (std::size_t y = 0; y < labels; ++y)
            lat.edge(k, p, y) += w[base + p * labels + y] * f.value;
      }
    }
  }
  return lat;
}

Lattice score_lattice(const Model& model, std::span<const FeatureVector> x) {
  return score_lattice(model.layout, view_of(model), x);
}

void forward_backward(Lattice& lat) {
  const std::size_t n = lat.n_, labels = lat.y_;
  lat.alpha_.assign(n * labels, 0.0);
  lat.beta_.assign(n * labels, 0.0);
  lat.inferred_ = false;
  if (n == 0) {
    lat.log_z_ = 0.0;
    lat.inferred_ = true;
    return;
  }
  std::vector<double> buf(labels);
  for (std::size_t y = 0; y < labels; ++y) lat.alpha_[y] = lat.node(0, y);
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t y = 0; y < labels; ++y) {
      for (std::size_t p = 0; p < labels; ++p)
        buf[p] = lat.alpha_[(k - 1) * labels + p] + lat.edge(k, p, y);
      const double a = log_sum_exp(buf.data(), labels) + lat.node(k, y);
      if (std::isnan(a)) throw NumericalError("NaN in forward table at position " + std::to_string(k));
      lat.alpha_[k * labels + y] = a;
    }
  }
  for (std::size_t k = n - 1; k-- > 0;) {
    for (std::size_t p = 0; p < labels; ++p) {
      for (std::size_t y = 0; y < labels; ++y)
        buf[y] = lat.edge(k + 1, p, y) + lat.node(k + 1, y) + lat.beta_[(k + 1) * labels + y];
      const double b = log_sum_exp(buf.data(), labels);
      if (std::isnan(b)) throw NumericalError("NaN in backward table at position " + std::to_string(k));
      lat.beta_[k * labels + p] = b;
    }
  }
  lat.log_z_ = log_sum_exp(&lat.alpha_[(n - 1) * labels], labels);
  if (!std::isfinite(lat.log_z_))
    throw NumericalError("non-finite log partition at position " + std::to_string(n - 1));
  lat.inferred_ = true;
}

LossGrad crf_loss_grad(const Model& model, const SequenceView& z) {
  std::vector<std::pair<std::size_t, double>> entries;
  LossGrad out;
  out.loss = crf_loss_grad_into(model.layout, view_of(model), z,
                                [&](std::size_t i, double v) { entries.emplace_back(i, v); });
  out.grad = merge_sorted(std::move(entries));
  return out;
}

double crf_loss(const ParamLayout& layout, WeightsView w, const SequenceView& z) {
  if (z.size() == 0) return 0.0;
  auto lat = score_lattice(layout, w, z.x);
  forward_backward(lat);
  return lat.log_z() - lat.path_score(z.gold);
}

Decoded viterbi(const Lattice& lat) {
  const std::size_t n = lat.length(), labels = lat.num_labels();
  Decoded out;
  if (n == 0) return out;
  std::vector<double> delta(n * labels);
  std::vector<std::size_t> back(n * labels, 0);
  for (std::size_t y = 0; y < labels; ++y) delta[y] = lat.node(0, y);
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t y = 0; y < labels; ++y) {
      std::size_t best = 0;
      double best_score = delta[(k - 1) * labels] + lat.edge(k, 0, y);
      for (std::size_t p = 1; p < labels; ++p) {
        const double s = delta[(k - 1) * labels + p] + lat.edge(k, p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      delta[k * labels + y] = best_score + lat.node(k, y);
      back[k * labels + y] = best;
    }
  }
  std::size_t y = 0;
  for (std::size_t c = 1; c < labels; ++c)
    if (delta[(n - 1) * labels + c] > delta[(n - 1) * labels + y]) y = c;
  out.score = delta[(n - 1) * labels + y];
  out.labels.assign(n, 0);
  for (std::size_t k = n; k-- > 0;) {
    out.labels[k] = static_cast<LabelId>(y);
    if (k > 0) y = back[k * labels + y];
  }
  return out;
}

Decoded viterbi(const Model& model, std::span<const FeatureVector> x) {
  return viterbi(score_lattice(model, x));
}

SparseVector path_features(const ParamLayout& layout, std::span<const FeatureVector> x,
                           std::span<const LabelId> labels) {
  std::vector<std::pair<std::size_t, double>> entries;
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (const auto& f : x[k]) entries.emplace_back(layout.node(f.id, labels[k]), f.value);
    if (k == 0) continue;
    entries.emplace_back(layout.trans(labels[k - 1], labels[k]), 1.0);
    if (layout.rich_edges())
      for (const auto& f : x[k])
        entries.emplace_back(layout.edge(f.id, labels[k - 1], labels[k]), f.value);
  }
  return merge_sorted(std::move(entries));
}

std::vector<double> WeightAverager::average(std::span<const double> current) const {
  std::vector<double> avg(current.begin(), current.end());
  if (steps_ == 0) return avg;
  const double t = static_cast<double>(steps_);
  for (std::size_t i = 0; i < avg.size(); ++i) avg[i] -= lagged_[i] / t;
  return avg;
}

std::size_t perceptron_update(Model& model, const SequenceView& z, double eta,
                              WeightAverager* averager) {
  if (averager) averager->begin_step();
  if (z.size() == 0) return 0;
  const auto pred = viterbi(model, z.x);
  std::size_t mistakes = 0;
  for (std::size_t k = 0; k < z.size(); ++k) mistakes += pred.labels[k] != z.gold[k];
  if (mistakes == 0) return 0;

  std::vector<std::pair<std::size_t, double>> diff;
  for (const auto& [i, v] : path_features(model.layout, z.x, z.gold)) diff.emplace_back(i, v);
  for (const auto& [i, v] : path_features(model.layout, z.x, pred.labels)) diff.emplace_back(i, -v);
  for (const auto& [i, v] : merge_sorted(std::move(diff))) {
    if (v == 0.0) continue;
    model.weights[i] += eta * v;
    if (averager) averager->record(i, eta * v);
  }
  return mistakes;
}

double stability_value(const Lattice& inferred, const SequenceView& z, std::size_t k) {
  return inferred.node_marginal(k, z.gold[k]);
}

double stability_value(const Model& model, const SequenceView& z, std::size_t k) {
  auto lat = score_lattice(model, z.x);
  forward_backward(lat);
  return stability_value(lat, z, k);
}

namespace {
constexpr std::string_view kModelMagic = "SRMD";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

std::string serialize_model(const Model& model) {
  detail::ByteWriter w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);
  w.u64(model.layout.num_features());
  w.u64(model.layout.num_labels());
  w.u8(model.layout.rich_edges() ? 1 : 0);
  w.strings(model.templates.lines());
  w.strings(model.labels->entries());
  w.strings(model.features->entries());
  w.u64(model.weights.size());
  for (double x : model.weights) w.f64(x);
  return w.take();
}

Model deserialize_model(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(kModelMagic.size()) != kModelMagic) throw DataError("not a model file");
  if (const auto v = r.u32(); v != kModelVersion)
    throw DataError("unsupported model file version " + std::to_string(v));
  const auto d = r.u64();
  const auto labels = r.u64();
  const bool rich = r.u8() != 0;
  Model m;
  m.templates = parse_template_lines(r.strings());
  if (m.templates.use_rich_edge != rich) throw DataError("model file: edge flag mismatch");
  auto la = std::make_shared<Alphabet>(r.strings());
  auto fa = std::make_shared<Alphabet>(r.strings());
  la->freeze();
  fa->freeze();
  if (la->size() != labels || fa->size() != d) throw DataError("model file: dimension mismatch");
  m.labels = la;
  m.features = fa;
  m.layout = ParamLayout(d, labels, rich);
  const auto count = r.checked_count(r.u64(), 8);
  if (count != m.layout.total()) throw DataError("model file: weight count mismatch");
  m.weights.resize(count);
  for (auto& x : m.weights) x = r.f64();
  if (!r.at_end()) throw DataError("model file: trailing bytes");
  return m;
}

void save_model(const Model& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace structreg
