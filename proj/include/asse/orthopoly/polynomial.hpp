#pragma once

#include <compare>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace asse::orthopoly {

/// Orthonormal univariate polynomial family.
///
/// Legendre polynomials are orthonormal for the uniform probability measure on
/// [lower, upper]; Hermite (probabilists') are orthonormal for the standard
/// normal density. Both are evaluated by the three-term recurrence
///
///   sqrt(b_{n+1}) q_{n+1}(x) = (x - a_n) q_n(x) - sqrt(b_n) q_{n-1}(x)
///
/// expressed in the family's reference variable (t in [-1,1] for Legendre).
class PolynomialFamily {
 public:
  enum class Kind { Legendre, Hermite };

  static PolynomialFamily legendre(double lower, double upper);
  static PolynomialFamily hermite();

  Kind kind() const noexcept { return kind_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  /// Recurrence coefficients (a_n, b_n) of the monic family in the reference variable.
  std::pair<double, double> recurrence(int n) const;

  double eval(int degree, double x) const;
  /// Values of degrees 0..max_degree at x, written into `out` (size max_degree + 1).
  void eval_all(int max_degree, double x, std::span<double> out) const;

 private:
  PolynomialFamily(Kind kind, double lower, double upper) : kind_(kind), lower_(lower), upper_(upper) {}
  double reference(double x) const;

  Kind kind_;
  double lower_;
  double upper_;
};

/// Per-dimension polynomial degrees of one multivariate basis term.
struct MultiIndex {
  std::vector<int> degrees;

  std::size_t dimension() const noexcept { return degrees.size(); }
  int total_degree() const noexcept;
  bool is_zero() const noexcept { return total_degree() == 0; }
  /// Number of dimensions with nonzero degree.
  int interaction_order() const noexcept;

  auto operator<=>(const MultiIndex&) const = default;
};

/// Graded lexicographic ordering: total degree first, then reverse-lex on
/// degrees so (1,0) precedes (0,1).
bool graded_less(const MultiIndex& a, const MultiIndex& b);

double eval_univariate(const PolynomialFamily& family, int degree, double x);

/// Tensor-product basis value prod_j phi_j^{(beta_j)}(x_j).
double eval_multivariate(const MultiIndex& mi, std::span<const PolynomialFamily> families, std::span<const double> point);

/// Design matrix Psi(i, l) = Phi_l(points.row(i)).
Eigen::MatrixXd design_matrix(std::span<const MultiIndex> basis, std::span<const PolynomialFamily> families,
                              const Eigen::MatrixXd& points);

}  // namespace asse::orthopoly
