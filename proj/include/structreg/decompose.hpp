#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "structreg/corpus.hpp"
#include "structreg/rng.hpp"

namespace structreg {

/// Structure-regularization operator: split each sample into contiguous
/// mini-samples of expected length `mini_size`.
struct DecompositionPolicy {
  /// Expected mini-sample length n'. 0 or +inf disables decomposition.
  double mini_size = 0.0;
  std::uint64_t seed = 0;
  bool refresh_each_epoch = true;
  /// Draw the first segment length uniformly from {1..ceil(n')}.
  bool randomize_phase = true;

  bool enabled() const noexcept {
    return mini_size > 0.0 && mini_size < std::numeric_limits<double>::infinity();
  }
  void validate() const;
};

/// Half-open span [begin, end) of a parent sample.
struct MiniSpan {
  std::size_t parent = 0;  // index into Dataset::samples
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const MiniSpan&) const = default;
};

/// Read-only slice of a sample: what models train and decode on.
struct SequenceView {
  std::span<const FeatureVector> x;
  std::span<const LabelId> gold;  // empty when unlabeled

  std::size_t size() const noexcept { return x.size(); }
};

inline SequenceView view_of(const Sample& s) { return {s.features, s.gold}; }
SequenceView view_of(const Dataset& ds, const MiniSpan& span);

struct MiniBatchStream {
  std::size_t epoch = 0;
  std::vector<MiniSpan> minis;
};

/// Segment lengths for one sequence of length n. Left to right: the first
/// segment is uniform on {1..ceil(n')} (when phase randomization is on),
/// later ones are floor(n') + Bernoulli(frac(n')); each is truncated by what
/// remains. Returns {n} when decomposition is off or n' >= n.
std::vector<std::size_t> segment_lengths(std::size_t n, const DecompositionPolicy& policy,
                                         Rng& rng);

std::vector<MiniSpan> decompose_sample(const Sample& s, std::size_t parent,
                                       const DecompositionPolicy& policy, Rng& rng);

/// Per-sample RNG for one epoch: keyed on (seed, epoch, sample id), or on
/// (seed, sample id) when refresh_each_epoch is off.
Rng sample_rng(const DecompositionPolicy& policy, std::size_t epoch, const Sample& s);

/// Decomposes every sample then shuffles the mini list uniformly. The shuffle
/// orders minis by a hash of (seed, epoch, sample id, span start), so a run
/// on S minus one sample sees the remaining minis in the same relative order.
MiniBatchStream decompose_epoch(const Dataset& ds, const DecompositionPolicy& policy,
                                std::size_t epoch);

/// The shuffle key used by decompose_epoch (exposed for tests).
std::uint64_t shuffle_key(const DecompositionPolicy& policy, std::size_t epoch,
                          std::uint64_t sample_id, std::size_t begin);

}  // namespace structreg
