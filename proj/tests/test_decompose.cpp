#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "doctest.h"
#include "structreg/corpus.hpp"
#include "structreg/decompose.hpp"
#include "structreg/errors.hpp"

using namespace structreg;

namespace {

Dataset lengths_dataset(std::vector<std::size_t> lengths) {
  Dataset ds;
  for (auto n : lengths) {
    Sample s;
    s.id = ds.samples.size() * 7 + 3;
    s.gold.assign(n, 0);
    s.features.assign(n, {});
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

// Every length sequence the sampler can emit for n and n' (phase on).
std::set<std::vector<std::size_t>> possible(std::size_t n, double mini) {
  const auto lo = static_cast<std::size_t>(std::floor(mini));
  const auto hi = static_cast<std::size_t>(std::ceil(mini));
  std::set<std::vector<std::size_t>> out;
  std::function<void(std::vector<std::size_t>, std::size_t)> rec = [&](auto seq, std::size_t left) {
    if (left == 0) {
      out.insert(seq);
      return;
    }
    for (auto len = lo; len <= hi; ++len) {
      auto s = seq;
      s.push_back(std::min(len, left));
      rec(s, left - s.back());
    }
  };
  for (std::size_t first = 1; first <= hi; ++first) rec({std::min(first, n)}, n - std::min(first, n));
  return out;
}

}  // namespace

TEST_CASE("three minis of two") {
  DecompositionPolicy p;
  p.mini_size = 2.0;
  p.randomize_phase = false;
  Sample s;
  s.gold.assign(6, 0);
  Rng rng(1);
  const auto spans = decompose_sample(s, 0, p, rng);
  CHECK(spans == std::vector<MiniSpan>{{0, 0, 2}, {0, 2, 4}, {0, 4, 6}});
}

TEST_CASE("disabled or oversized mini size passes samples through") {
  const auto ds = lengths_dataset({4, 9, 1, 6});
  for (double mini : {0.0, 9.0, 50.0, std::numeric_limits<double>::infinity()}) {
    DecompositionPolicy p;
    p.mini_size = mini;
    const auto st = decompose_epoch(ds, p, 3);
    REQUIRE(st.minis.size() == ds.size());
    std::set<std::size_t> parents;
    for (const auto& m : st.minis) {
      CHECK(m.begin == 0);
      CHECK(m.end == ds.samples[m.parent].length());
      parents.insert(m.parent);
    }
    CHECK(parents.size() == ds.size());
  }
}

TEST_CASE("n=7 at 2.5 stays within the enumerated outcomes") {
  DecompositionPolicy p;
  p.mini_size = 2.5;
  const auto all = possible(7, 2.5);
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    Rng rng(seed);
    const auto lens = segment_lengths(7, p, rng);
    CHECK(std::accumulate(lens.begin(), lens.end(), std::size_t{0}) == 7);
    CHECK(all.count(lens) == 1);
    for (std::size_t i = 1; i + 1 < lens.size(); ++i) CHECK((lens[i] == 2 || lens[i] == 3));
    seen.insert(lens);
    Rng again(seed);
    CHECK(segment_lengths(7, p, again) == lens);
  }
  CHECK(seen == all);
}

TEST_CASE("Monte Carlo segment lengths at 5.5") {
  DecompositionPolicy p;
  p.mini_size = 5.5;
  Rng rng(42);
  std::size_t count = 0;
  double sum = 0.0;
  std::set<std::size_t> interior;
  while (count < 20000) {
    const auto lens = segment_lengths(60, p, rng);
    for (std::size_t i = 1; i + 1 < lens.size(); ++i) {
      sum += static_cast<double>(lens[i]);
      interior.insert(lens[i]);
      ++count;
    }
    for (auto l : lens) CHECK((l >= 1 && l <= 6));
  }
  CHECK(sum / count >= 5.4);
  CHECK(sum / count <= 5.6);
  CHECK(interior == std::set<std::size_t>{5, 6});
}

TEST_CASE("epoch streams") {
  const auto ds = lengths_dataset({12, 30, 7, 19, 3});
  DecompositionPolicy p;
  p.mini_size = 3.5;
  p.seed = 9;
  const auto a = decompose_epoch(ds, p, 2), b = decompose_epoch(ds, p, 2);
  CHECK(a.minis == b.minis);
  CHECK(decompose_epoch(ds, p, 3).minis != a.minis);

  // Spans of each parent partition [0, n).
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<MiniSpan> mine;
    for (const auto& m : a.minis)
      if (m.parent == i) mine.push_back(m);
    std::sort(mine.begin(), mine.end(), [](auto& x, auto& y) { return x.begin < y.begin; });
    std::size_t at = 0;
    for (const auto& m : mine) {
      CHECK(m.begin == at);
      CHECK(m.end > m.begin);
      at = m.end;
    }
    CHECK(at == ds.samples[i].length());
  }

  // Without refresh every epoch decomposes alike (order still changes).
  p.refresh_each_epoch = false;
  auto sorted = [](std::vector<MiniSpan> v) {
    std::sort(v.begin(), v.end(), [](auto& x, auto& y) {
      return x.parent != y.parent ? x.parent < y.parent : x.begin < y.begin;
    });
    return v;
  };
  CHECK(sorted(decompose_epoch(ds, p, 0).minis) == sorted(decompose_epoch(ds, p, 5).minis));
}

TEST_CASE("removing a sample keeps the order of the rest") {
  const auto ds = lengths_dataset({12, 30, 7, 19, 3, 25});
  DecompositionPolicy p;
  p.mini_size = 4.0;
  const auto full = decompose_epoch(ds, p, 1);
  const auto reduced = without_sample(ds, 2);
  const auto part = decompose_epoch(reduced, p, 1);
  std::vector<std::pair<std::uint64_t, std::size_t>> expect, got;
  for (const auto& m : full.minis)
    if (m.parent != 2) expect.emplace_back(ds.samples[m.parent].id, m.begin);
  for (const auto& m : part.minis) got.emplace_back(reduced.samples[m.parent].id, m.begin);
  CHECK(expect == got);
}

TEST_CASE("invalid mini sizes") {
  DecompositionPolicy p;
  for (double bad : {0.5, -1.0, std::nan("")}) {
    p.mini_size = bad;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  p.mini_size = 1.0;
  CHECK_NOTHROW(p.validate());
}
