#include "structreg/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "binary_io.hpp"
#include "structreg/errors.hpp"
#include "structreg/rng.hpp"

namespace structreg {

Alphabet::Alphabet(std::vector<std::string> entries) {
  for (auto& e : entries) intern(e);
}

std::optional<std::uint32_t> Alphabet::intern(std::string_view s) {
  if (auto it = index_.find(std::string(s)); it != index_.end()) return it->second;
  if (frozen_) return std::nullopt;
  const auto id = static_cast<std::uint32_t>(entries_.size());
  entries_.emplace_back(s);
  index_.emplace(entries_.back(), id);
  return id;
}

std::optional<std::uint32_t> Alphabet::find(std::string_view s) const {
  if (auto it = index_.find(std::string(s)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Dataset::total_tokens() const noexcept {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.length();
  return n;
}

double Dataset::mean_length() const noexcept {
  return samples.empty() ? 0.0
                         : static_cast<double>(total_tokens()) /
                               static_cast<double>(samples.size());
}

double Dataset::max_abs_feature_value() const noexcept {
  double v = 0.0;
  for (const auto& s : samples)
    for (const auto& fv : s.features)
      for (const auto& f : fv) v = std::max(v, std::abs(f.value));
  return v;
}

namespace {

std::vector<std::string> split_columns(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) cols.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

std::size_t resolve_column(int col, std::size_t ncols, std::size_t line) {
  const long idx = col < 0 ? static_cast<long>(ncols) + col : col;
  if (idx < 0 || idx >= static_cast<long>(ncols))
    throw FormatError(line, "column " + std::to_string(col) + " out of range for " +
                                std::to_string(ncols) + " columns");
  return static_cast<std::size_t>(idx);
}

}  // namespace

Dataset read_conll(std::istream& in, const ConllSchema& schema, AlphabetPtr labels) {
  Dataset ds;
  std::shared_ptr<Alphabet> own_labels;
  if (labels) {
    ds.labels = std::move(labels);
  } else {
    own_labels = std::make_shared<Alphabet>();
    ds.labels = own_labels;
  }

  std::size_t ncols = 0;
  std::size_t lineno = 0;
  Sample current;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      current.id = ds.samples.size();
      ds.samples.push_back(std::move(current));
    }
    current = Sample{};
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto cols = split_columns(line);
    if (cols.empty()) {
      flush();
      continue;
    }
    if (ncols == 0) ncols = cols.size();
    if (cols.size() != ncols)
      throw FormatError(lineno, "expected " + std::to_string(ncols) + " columns, found " +
                                    std::to_string(cols.size()));
    const auto word_col = resolve_column(schema.word_column, ncols, lineno);
    std::optional<std::size_t> tag_col;
    if (schema.has_tags) {
      tag_col = resolve_column(schema.tag_column, ncols, lineno);
      if (*tag_col == word_col) throw FormatError(lineno, "tag column equals word column");
    }

    Token tok;
    tok.surface = cols[word_col];
    for (std::size_t c = 0; c < ncols; ++c)
      if (c != word_col && (!tag_col || c != *tag_col)) tok.attributes.push_back(cols[c]);
    current.tokens.push_back(std::move(tok));

    if (tag_col) {
      std::optional<std::uint32_t> id =
          own_labels ? own_labels->intern(cols[*tag_col]) : ds.labels->find(cols[*tag_col]);
      if (!id) throw FormatError(lineno, "unknown label '" + cols[*tag_col] + "'");
      current.gold.push_back(*id);
    }
  }
  flush();
  return ds;
}

Dataset read_conll_file(const std::string& path, const ConllSchema& schema,
                        AlphabetPtr labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_conll(in, schema, std::move(labels));
}

void write_conll(std::ostream& out, const Dataset& ds,
                 const std::vector<std::vector<LabelId>>* extra) {
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    for (std::size_t k = 0; k < s.tokens.size(); ++k) {
      out << s.tokens[k].surface;
      for (const auto& a : s.tokens[k].attributes) out << '\t' << a;
      if (k < s.gold.size()) out << '\t' << ds.labels->at(s.gold[k]);
      if (extra) out << '\t' << ds.labels->at((*extra)[i].at(k));
      out << '\n';
    }
    out << '\n';
  }
}

void SynthSpec::validate() const {
  if (num_labels < 2) throw ConfigError("synthetic spec: num_labels must be >= 2");
  if (vocab_size < 1) throw ConfigError("synthetic spec: vocab_size must be positive");
  if (!(mean_length >= 1.0)) throw ConfigError("synthetic spec: mean_length must be >= 1");
  if (!(transition_sharpness > 0.0) || !(emission_sharpness > 0.0))
    throw ConfigError("synthetic spec: sharpness must be positive");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0))
    throw ConfigError("synthetic spec: noise_rate must be in [0,1]");
}

namespace {

std::vector<std::vector<double>> sharp_rows(Rng& rng, std::size_t rows, std::size_t cols,
                                            double sharpness) {
  std::vector<std::vector<double>> table(rows, std::vector<double>(cols));
  for (auto& row : table) {
    double mx = -INFINITY;
    for (auto& x : row) {
      x = sharpness * rng.normal();
      mx = std::max(mx, x);
    }
    for (auto& x : row) x = std::exp(x - mx);
  }
  return table;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec) { return generate_synthetic(spec, 0); }

Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t stream) {
  spec.validate();
  Rng table_rng(mix_seed({spec.seed, 0x484D4DULL}));
  const auto initial = sharp_rows(table_rng, 1, spec.num_labels, spec.transition_sharpness);
  const auto transition =
      sharp_rows(table_rng, spec.num_labels, spec.num_labels, spec.transition_sharpness);
  const auto emission =
      sharp_rows(table_rng, spec.num_labels, spec.vocab_size, spec.emission_sharpness);

  Dataset ds;
  auto labels = std::make_shared<Alphabet>();
  for (std::size_t y = 0; y < spec.num_labels; ++y) labels->intern("T" + std::to_string(y));
  labels->freeze();
  ds.labels = labels;

  Rng rng(mix_seed({spec.seed, stream, 0x53414D50ULL}));
  ds.samples.reserve(spec.num_samples);
  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    Sample s;
    s.id = i;
    const auto n = 1 + rng.poisson(spec.mean_length - 1.0);
    std::size_t y = rng.categorical(initial[0]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) y = rng.categorical(transition[y]);
      std::size_t w = rng.categorical(emission[y]);
      if (spec.noise_rate > 0.0 && rng.bernoulli(spec.noise_rate)) w = rng.below(spec.vocab_size);
      s.tokens.push_back(Token{"w" + std::to_string(w), {}});
      s.gold.push_back(static_cast<LabelId>(y));
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction,
                                          std::uint64_t seed) {
  if (ds.empty()) throw ConfigError("split_dataset: empty dataset");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("split_dataset: fraction must be in (0,1)");
  const auto m = ds.size();
  const auto first = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m)));
  if (first == 0 || first == m)
    throw ConfigError("split_dataset: fraction " + std::to_string(fraction) +
                      " leaves an empty half for m=" + std::to_string(m));

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  Rng rng(mix_seed({seed, 0x53504C54ULL}));
  rng.shuffle(order);

  auto labels = std::make_shared<Alphabet>(*ds.labels);
  auto features = std::make_shared<Alphabet>(*ds.features);
  labels->freeze();
  features->freeze();

  Dataset a, b;
  a.labels = b.labels = labels;
  a.features = b.features = features;
  for (std::size_t i = 0; i < m; ++i)
    (i < first ? a : b).samples.push_back(ds.samples[order[i]]);
  return {std::move(a), std::move(b)};
}

Dataset without_sample(const Dataset& ds, std::size_t index) {
  Dataset out;
  out.labels = ds.labels;
  out.features = ds.features;
  out.samples.reserve(ds.size() - 1);
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (i != index) out.samples.push_back(ds.samples[i]);
  return out;
}

namespace {
constexpr std::string_view kDatasetMagic = "SRDS";
constexpr std::uint32_t kDatasetVersion = 1;
}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  detail::ByteWriter w;
  w.raw(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.strings(ds.labels->entries());
  w.strings(ds.features->entries());
  w.u64(ds.samples.size());
  for (const auto& s : ds.samples) {
    w.u64(s.id);
    w.u64(s.tokens.size());
    for (const auto& t : s.tokens) {
      w.str(t.surface);
      w.strings(t.attributes);
    }
    w.u64(s.gold.size());
    for (auto g : s.gold) w.u32(g);
    w.u64(s.features.size());
    for (const auto& fv : s.features) {
      w.u64(fv.size());
      for (const auto& f : fv) {
        w.u32(f.id);
        w.f64(f.value);
      }
    }
  }
  return w.take();
}

Dataset deserialize_dataset(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(kDatasetMagic.size()) != kDatasetMagic) throw DataError("not a dataset cache");
  if (const auto v = r.u32(); v != kDatasetVersion)
    throw DataError("unsupported dataset cache version " + std::to_string(v));
  Dataset ds;
  auto labels = std::make_shared<Alphabet>(r.strings());
  auto features = std::make_shared<Alphabet>(r.strings());
  labels->freeze();
  features->freeze();
  ds.labels = labels;
  ds.features = features;
  const auto m = r.checked_count(r.u64(), 8);
  ds.samples.resize(m);
  for (auto& s : ds.samples) {
    s.id = r.u64();
    s.tokens.resize(r.checked_count(r.u64(), 16));
    for (auto& t : s.tokens) {
      t.surface = r.str();
      t.attributes = r.strings();
    }
    s.gold.resize(r.checked_count(r.u64(), 4));
    for (auto& g : s.gold) {
      g = r.u32();
      if (g >= labels->size()) throw DataError("label id out of range in dataset cache");
    }
    s.features.resize(r.checked_count(r.u64(), 8));
    for (auto& fv : s.features) {
      fv.resize(r.checked_count(r.u64(), 12));
      for (auto& f : fv) {
        f.id = r.u32();
        f.value = r.f64();
      }
    }
  }
  if (!r.at_end()) throw DataError("trailing bytes in dataset cache");
  return ds;
}

}  // namespace structreg
