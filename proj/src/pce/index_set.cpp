#include "asse/pce/index_set.hpp"

#include <algorithm>
#include <cmath>

#include "asse/errors.hpp"

namespace asse::pce {

namespace {

// Relative slack on the norm test; (2^0.5)^2 evaluates slightly above 2.
constexpr double kNormSlack = 1e-10;

void enumerate(std::vector<int>& current, std::size_t pos, int remaining, double q, int max_order,
               std::vector<MultiIndex>& out) {
  if (pos == current.size()) {
    MultiIndex mi{current};
    if (hyperbolic_norm(mi, q) <= max_order * (1.0 + kNormSlack)) out.push_back(std::move(mi));
    return;
  }
  for (int d = 0; d <= remaining; ++d) {
    current[pos] = d;
    enumerate(current, pos + 1, remaining - d, q, max_order, out);
  }
  current[pos] = 0;
}

}  // namespace

double hyperbolic_norm(const MultiIndex& mi, double q) {
  double s = 0.0;
  for (int d : mi.degrees)
    if (d > 0) s += std::pow(static_cast<double>(d), q);
  return s == 0.0 ? 0.0 : std::pow(s, 1.0 / q);
}

MultiIndexSet hyperbolic_index_set(std::size_t dimension, int max_order, double q) {
  if (dimension == 0) throw DomainError("hyperbolic_index_set: dimension must be >= 1");
  if (max_order < 0) throw DomainError("hyperbolic_index_set: order must be >= 0");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("hyperbolic_index_set: q must lie in (0, 1]");

  MultiIndexSet set{{}, dimension, max_order, q};
  std::vector<int> current(dimension, 0);
  // For q <= 1 the q-norm dominates the total degree, so total degree <= H bounds the search.
  enumerate(current, 0, max_order, q, max_order, set.indices);
  std::sort(set.indices.begin(), set.indices.end(), orthopoly::graded_less);
  return set;
}

}  // namespace asse::pce
