#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace structreg {

using LabelId = std::uint32_t;
using FeatureId = std::uint32_t;

struct Token {
  std::string surface;
  std::vector<std::string> attributes;
  bool operator==(const Token&) const = default;
};

/// One active feature in a sparse vector.
struct Feature {
  FeatureId id;
  double value;
  bool operator==(const Feature&) const = default;
};

/// Per-position sparse vector; ids strictly increasing.
using FeatureVector = std::vector<Feature>;

struct Sample {
  /// Stable identity within the dataset it was read or generated into.
  /// Decomposition and shuffling are keyed on it, so removing one sample
  /// leaves the random streams of all others untouched.
  std::uint64_t id = 0;
  std::vector<Token> tokens;
  std::vector<FeatureVector> features;
  std::vector<LabelId> gold;

  std::size_t length() const noexcept {
    return std::max({tokens.size(), features.size(), gold.size()});
  }
  bool operator==(const Sample&) const = default;
};

/// Bijection string <-> dense id, in first-insertion order.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> entries);

  /// Existing id, or a new one when not frozen; absent when frozen and unseen.
  std::optional<std::uint32_t> intern(std::string_view s);
  std::optional<std::uint32_t> find(std::string_view s) const;
  const std::string& at(std::uint32_t id) const { return entries_.at(id); }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::string>& entries() const noexcept { return entries_; }

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  bool operator==(const Alphabet& o) const { return entries_ == o.entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;
  bool frozen_ = false;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

struct Dataset {
  std::vector<Sample> samples;
  AlphabetPtr labels = std::make_shared<Alphabet>();
  AlphabetPtr features = std::make_shared<Alphabet>();

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::size_t total_tokens() const noexcept;
  double mean_length() const noexcept;
  /// Largest |value| over all extracted feature values (the v of the bounds).
  double max_abs_feature_value() const noexcept;
};

struct ConllSchema {
  /// Tag column index; negative counts from the end (-1 = last column).
  int tag_column = -1;
  /// Column holding the surface form; remaining non-tag columns become attributes.
  int word_column = 0;
  /// When false the input carries no tags (prediction input).
  bool has_tags = true;
};

/// Parses blank-line separated CoNLL blocks. Label ids are assigned in
/// first-occurrence order unless `labels` is given, in which case it must be
/// frozen and an unseen label is a FormatError.
Dataset read_conll(std::istream& in, const ConllSchema& schema = {},
                   AlphabetPtr labels = nullptr);
Dataset read_conll_file(const std::string& path, const ConllSchema& schema = {},
                        AlphabetPtr labels = nullptr);

/// Writes tokens (surface, attributes, tag) tab-separated; optional extra
/// column per sample appended after the tag.
void write_conll(std::ostream& out, const Dataset& ds,
                 const std::vector<std::vector<LabelId>>* extra = nullptr);

struct SynthSpec {
  std::size_t num_labels = 5;
  std::size_t vocab_size = 100;
  double mean_length = 40.0;
  std::size_t num_samples = 200;
  double transition_sharpness = 2.0;
  double emission_sharpness = 2.0;
  double noise_rate = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Samples from a fixed first-order HMM. Rows of the transition and emission
/// tables are softmax(sharpness * g) with g standard normal; lengths are
/// 1 + Poisson(mean_length - 1). Pure function of the spec.
Dataset generate_synthetic(const SynthSpec& spec);

/// Same HMM as generate_synthetic(spec) but an independent sample stream:
/// used for held-out data drawn from the training distribution.
Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t stream);

/// Seeded shuffle then split; first half gets floor(fraction * m) samples.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction,
                                          std::uint64_t seed);

/// Copy of ds with sample `index` removed; other ids are unchanged.
Dataset without_sample(const Dataset& ds, std::size_t index);

// Versioned binary cache (magic "SRDS", u32 version).
std::string serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(std::string_view bytes);

}  // namespace structreg
