#pragma once

#include <cmath>
#include <vector>

#include "structreg/errors.hpp"

namespace structreg {

template <class Add>
double crf_loss_grad_into(const ParamLayout& layout, WeightsView w, const SequenceView& z,
                          Add&& add) {
  const std::size_t n = z.size();
  if (n == 0) return 0.0;
  if (z.gold.size() != n) throw DataError("crf_loss_grad: sequence has no gold labels");
  auto lat = score_lattice(layout, w, z.x);
  forward_backward(lat);
  const std::size_t labels = layout.num_labels();
  const double loss = lat.log_z() - lat.path_score(z.gold);

  std::vector<double> row(labels);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t y = 0; y < labels; ++y)
      row[y] = lat.node_marginal(k, y) - (z.gold[k] == y ? 1.0 : 0.0);
    for (const auto& f : z.x[k])
      for (std::size_t y = 0; y < labels; ++y) add(layout.node(f.id, y), f.value * row[y]);
  }

  std::vector<double> pair(labels * labels);
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t p = 0; p < labels; ++p)
      for (std::size_t y = 0; y < labels; ++y)
        pair[p * labels + y] = lat.pair_marginal(k, p, y) -
                               (z.gold[k - 1] == p && z.gold[k] == y ? 1.0 : 0.0);
    for (std::size_t p = 0; p < labels; ++p)
      for (std::size_t y = 0; y < labels; ++y) add(layout.trans(p, y), pair[p * labels + y]);
    if (layout.rich_edges()) {
      for (const auto& f : z.x[k]) {
        const std::size_t base = layout.edge_row(f.id);
        for (std::size_t i = 0; i < labels * labels; ++i) add(base + i, f.value * pair[i]);
      }
    }
  }
  return loss;
}

}  // namespace structreg
