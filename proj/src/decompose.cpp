#include "structreg/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "structreg/errors.hpp"

namespace structreg {

void DecompositionPolicy::validate() const {
  if (std::isnan(mini_size) || mini_size < 0.0)
    throw ConfigError("mini size must be >= 1, or 0 to disable");
  if (mini_size > 0.0 && mini_size < 1.0)
    throw ConfigError("mini size must be >= 1, or 0 to disable");
}

SequenceView view_of(const Dataset& ds, const MiniSpan& span) {
  const auto& s = ds.samples[span.parent];
  SequenceView v;
  v.x = std::span<const FeatureVector>(s.features).subspan(span.begin, span.size());
  if (!s.gold.empty()) v.gold = std::span<const LabelId>(s.gold).subspan(span.begin, span.size());
  return v;
}

std::vector<std::size_t> segment_lengths(std::size_t n, const DecompositionPolicy& policy,
                                         Rng& rng) {
  if (n == 0) return {};
  if (!policy.enabled() || policy.mini_size >= static_cast<double>(n)) return {n};
  const double whole = std::floor(policy.mini_size);
  const double frac = policy.mini_size - whole;
  const auto base = static_cast<std::size_t>(whole);

  std::vector<std::size_t> lengths;
  std::size_t remaining = n;
  bool first = true;
  while (remaining > 0) {
    std::size_t len;
    if (first && policy.randomize_phase) {
      const auto top = static_cast<std::size_t>(std::ceil(policy.mini_size));
      len = 1 + rng.below(top);
    } else {
      len = base + (frac > 0.0 && rng.bernoulli(frac) ? 1 : 0);
    }
    first = false;
    len = std::min(len, remaining);
    lengths.push_back(len);
    remaining -= len;
  }
  return lengths;
}

std::vector<MiniSpan> decompose_sample(const Sample& s, std::size_t parent,
                                       const DecompositionPolicy& policy, Rng& rng) {
  std::vector<MiniSpan> out;
  std::size_t begin = 0;
  for (auto len : segment_lengths(s.length(), policy, rng)) {
    out.push_back(MiniSpan{parent, begin, begin + len});
    begin += len;
  }
  return out;
}

Rng sample_rng(const DecompositionPolicy& policy, std::size_t epoch, const Sample& s) {
  const std::uint64_t e = policy.refresh_each_epoch ? epoch : 0;
  return Rng(mix_seed({policy.seed, e, s.id, 0x44454350ULL}));
}

std::uint64_t shuffle_key(const DecompositionPolicy& policy, std::size_t epoch,
                          std::uint64_t sample_id, std::size_t begin) {
  return mix_seed({policy.seed, epoch, sample_id, begin, 0x53485546ULL});
}

MiniBatchStream decompose_epoch(const Dataset& ds, const DecompositionPolicy& policy,
                                std::size_t epoch) {
  policy.validate();
  MiniBatchStream stream;
  stream.epoch = epoch;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto rng = sample_rng(policy, epoch, ds.samples[i]);
    auto spans = decompose_sample(ds.samples[i], i, policy, rng);
    stream.minis.insert(stream.minis.end(), spans.begin(), spans.end());
  }
  struct Keyed {
    std::uint64_t key;
    std::uint64_t id;
    MiniSpan span;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(stream.minis.size());
  for (const auto& m : stream.minis) {
    const auto id = ds.samples[m.parent].id;
    keyed.push_back({shuffle_key(policy, epoch, id, m.begin), id, m});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.id != b.id) return a.id < b.id;
    return a.span.begin < b.span.begin;
  });
  for (std::size_t i = 0; i < keyed.size(); ++i) stream.minis[i] = keyed[i].span;
  return stream;
}

}  // namespace structreg
