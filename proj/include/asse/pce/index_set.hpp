#pragma once

#include <vector>

#include "asse/orthopoly/polynomial.hpp"

namespace asse::pce {

using orthopoly::MultiIndex;

/// Truncated multi-index set {beta : (sum_j beta_j^q)^(1/q) <= H}, graded-lex ordered.
struct MultiIndexSet {
  std::vector<MultiIndex> indices;
  std::size_t dimension = 0;
  int max_order = 0;
  double q = 1.0;

  std::size_t size() const noexcept { return indices.size(); }
};

/// q-quasi-norm of a multi-index.
double hyperbolic_norm(const MultiIndex& mi, double q);

MultiIndexSet hyperbolic_index_set(std::size_t dimension, int max_order, double q);

}  // namespace asse::pce
