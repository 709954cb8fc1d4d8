#include "asse/orthopoly/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "asse/errors.hpp"

namespace asse::orthopoly {

PolynomialFamily PolynomialFamily::legendre(double lower, double upper) {
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper))
    throw DomainError("legendre: interval requires finite lower < upper");
  return PolynomialFamily(Kind::Legendre, lower, upper);
}

PolynomialFamily PolynomialFamily::hermite() {
  return PolynomialFamily(Kind::Hermite, -std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity());
}

std::pair<double, double> PolynomialFamily::recurrence(int n) const {
  if (n < 0) throw DomainError("recurrence: negative degree");
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  if (kind_ == Kind::Legendre) return {0.0, nn * nn / (4.0 * nn * nn - 1.0)};
  return {0.0, nn};
}

double PolynomialFamily::reference(double x) const {
  if (kind_ == Kind::Hermite) return x;
  if (!(x >= lower_ && x <= upper_))
    throw DomainError("legendre: x=" + std::to_string(x) + " outside [" + std::to_string(lower_) + ", " +
                      std::to_string(upper_) + "]");
  return (2.0 * x - lower_ - upper_) / (upper_ - lower_);
}

void PolynomialFamily::eval_all(int max_degree, double x, std::span<double> out) const {
  if (max_degree < 0) throw DomainError("eval_all: negative degree");
  if (out.size() < static_cast<std::size_t>(max_degree) + 1) throw ShapeError("eval_all: output span too small");
  const double t = reference(x);
  out[0] = 1.0;
  if (max_degree == 0) return;
  double sqrt_b_prev = 0.0;  // sqrt(b_0) multiplies q_{-1} = 0
  for (int n = 0; n < max_degree; ++n) {
    const auto [a, b_next] = recurrence(n + 1);
    (void)a;
    const double sqrt_b_next = std::sqrt(b_next);
    const double prev = n > 0 ? out[n - 1] : 0.0;
    out[n + 1] = (t * out[n] - sqrt_b_prev * prev) / sqrt_b_next;
    sqrt_b_prev = sqrt_b_next;
  }
}

double PolynomialFamily::eval(int degree, double x) const {
  if (degree < 0) throw DomainError("eval: negative degree");
  std::vector<double> buf(static_cast<std::size_t>(degree) + 1);
  eval_all(degree, x, buf);
  return buf.back();
}

int MultiIndex::total_degree() const noexcept {
  int s = 0;
  for (int d : degrees) s += d;
  return s;
}

int MultiIndex::interaction_order() const noexcept {
  return static_cast<int>(std::count_if(degrees.begin(), degrees.end(), [](int d) { return d != 0; }));
}

bool graded_less(const MultiIndex& a, const MultiIndex& b) {
  const int ta = a.total_degree();
  const int tb = b.total_degree();
  if (ta != tb) return ta < tb;
  return a.degrees > b.degrees;
}

double eval_univariate(const PolynomialFamily& family, int degree, double x) { return family.eval(degree, x); }

double eval_multivariate(const MultiIndex& mi, std::span<const PolynomialFamily> families,
                         std::span<const double> point) {
  if (mi.dimension() != families.size() || mi.dimension() != point.size())
    throw ShapeError("eval_multivariate: dimensions of index, families and point differ");
  double v = 1.0;
  for (std::size_t j = 0; j < mi.dimension(); ++j)
    if (mi.degrees[j] != 0) v *= families[j].eval(mi.degrees[j], point[j]);
  return v;
}

Eigen::MatrixXd design_matrix(std::span<const MultiIndex> basis, std::span<const PolynomialFamily> families,
                              const Eigen::MatrixXd& points) {
  const auto m = families.size();
  if (static_cast<std::size_t>(points.cols()) != m) throw ShapeError("design_matrix: point dimension mismatch");
  std::vector<int> max_deg(m, 0);
  for (const auto& mi : basis) {
    if (mi.dimension() != m) throw ShapeError("design_matrix: multi-index dimension mismatch");
    for (std::size_t j = 0; j < m; ++j) max_deg[j] = std::max(max_deg[j], mi.degrees[j]);
  }
  Eigen::MatrixXd psi(points.rows(), static_cast<Eigen::Index>(basis.size()));
  std::vector<std::vector<double>> uni(m);
  for (std::size_t j = 0; j < m; ++j) uni[j].resize(static_cast<std::size_t>(max_deg[j]) + 1);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) families[j].eval_all(max_deg[j], points(i, static_cast<Eigen::Index>(j)), uni[j]);
    for (std::size_t l = 0; l < basis.size(); ++l) {
      double v = 1.0;
      for (std::size_t j = 0; j < m; ++j) v *= uni[j][static_cast<std::size_t>(basis[l].degrees[j])];
      psi(i, static_cast<Eigen::Index>(l)) = v;
    }
  }
  return psi;
}

}  // namespace asse::orthopoly
