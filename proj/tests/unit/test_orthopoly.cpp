#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "asse/errors.hpp"
#include "asse/orthopoly/polynomial.hpp"

using namespace asse::orthopoly;
using doctest::Approx;

namespace {

// Golub-Welsch nodes/weights for the standard normal measure (test-only oracle).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    weights[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

// Monomial coefficients of the orthonormal polynomials from closed forms, in long double.
std::vector<long double> legendre_monomials(int n) {
  std::vector<long double> c(n + 1, 0.0L);
  auto binom = [](int a, int b) {
    long double r = 1.0L;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  for (int k = 0; k <= n / 2; ++k)
    c[n - 2 * k] = ((k % 2) ? -1.0L : 1.0L) * binom(n, k) * binom(2 * n - 2 * k, n) / std::pow(2.0L, n);
  for (auto& v : c) v *= std::sqrt(2.0L * n + 1.0L);
  return c;
}

std::vector<long double> hermite_monomials(int n) {
  std::vector<long double> c(n + 1, 0.0L);
  auto fact = [](int a) {
    long double r = 1.0L;
    for (int i = 2; i <= a; ++i) r *= i;
    return r;
  };
  for (int k = 0; k <= n / 2; ++k)
    c[n - 2 * k] = ((k % 2) ? -1.0L : 1.0L) * fact(n) / (fact(k) * fact(n - 2 * k) * std::pow(2.0L, k));
  for (auto& v : c) v /= std::sqrt(fact(n));
  return c;
}

long double horner(const std::vector<long double>& c, long double x) {
  long double v = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

}  // namespace

TEST_CASE("legendre closed-form values") {
  const auto fam = PolynomialFamily::legendre(-1.0, 1.0);
  CHECK(eval_univariate(fam, 0, 0.3) == 1.0);
  CHECK(eval_univariate(fam, 1, 0.5) == Approx(std::sqrt(3.0) * 0.5).epsilon(1e-15));
  CHECK(eval_univariate(fam, 1, 0.5) == Approx(0.866025).epsilon(1e-6));
  CHECK_THROWS_AS(eval_univariate(fam, 2, 1.5), asse::DomainError);
  CHECK_THROWS_AS(PolynomialFamily::legendre(1.0, 0.0), asse::DomainError);

  const auto [a, b] = fam.recurrence(2);
  CHECK(a == 0.0);
  CHECK(b == Approx(4.0 / 15.0));
}

TEST_CASE("legendre degree 2 and 3 are orthogonal under 10-point Gauss-Legendre") {
  const auto fam = PolynomialFamily::legendre(-1.0, 1.0);
  const double ip = boost::math::quadrature::gauss<double, 10>::integrate(
                        [&](double x) { return fam.eval(2, x) * fam.eval(3, x); }, -1.0, 1.0) /
                    2.0;
  CHECK(std::abs(ip) < 1e-12);
}

TEST_CASE("gram matrices are the identity") {
  SUBCASE("legendre on a shifted interval") {
    const double lo = 0.25, hi = 0.625;
    const auto fam = PolynomialFamily::legendre(lo, hi);
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; j <= 8; ++j) {
        const double ip = boost::math::quadrature::gauss<double, 10>::integrate(
                              [&](double x) { return fam.eval(i, x) * fam.eval(j, x); }, lo, hi) /
                          (hi - lo);
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-9);
      }
  }
  SUBCASE("hermite under the standard normal") {
    const auto fam = PolynomialFamily::hermite();
    std::vector<double> nodes, weights;
    gauss_hermite(12, nodes, weights);
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; j <= 8; ++j) {
        double ip = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) ip += weights[k] * fam.eval(i, nodes[k]) * fam.eval(j, nodes[k]);
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-9);
      }
  }
}

TEST_CASE("recurrence matches monomial expansion") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.5);
  const auto leg = PolynomialFamily::legendre(-1.0, 1.0);
  const auto her = PolynomialFamily::hermite();
  std::vector<double> buf(11);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = unif(rng);
    const double y = normal(rng);
    leg.eval_all(10, x, buf);
    for (int n = 0; n <= 10; ++n) CHECK(std::abs(buf[n] - static_cast<double>(horner(legendre_monomials(n), x))) < 1e-9);
    her.eval_all(10, y, buf);
    for (int n = 0; n <= 10; ++n) CHECK(std::abs(buf[n] - static_cast<double>(horner(hermite_monomials(n), y))) < 1e-9);
  }
}

TEST_CASE("multivariate tensor product") {
  const std::vector<PolynomialFamily> fams{PolynomialFamily::legendre(-1, 1), PolynomialFamily::legendre(-1, 1)};
  const std::vector<double> p{0.0, 0.7};
  CHECK(eval_multivariate(MultiIndex{{0, 0}}, fams, p) == 1.0);
  CHECK(eval_multivariate(MultiIndex{{2, 0}}, fams, p) == Approx(-std::sqrt(5.0) / 2.0).epsilon(1e-14));
  CHECK(eval_multivariate(MultiIndex{{2, 0}}, fams, p) == Approx(-1.118034).epsilon(1e-6));
  const std::vector<double> r{0.3, -0.4};
  CHECK(eval_multivariate(MultiIndex{{1, 1}}, fams, r) ==
        Approx(fams[0].eval(1, 0.3) * fams[1].eval(1, -0.4)).epsilon(1e-15));
  CHECK_THROWS_AS(eval_multivariate(MultiIndex{{1, 1, 0}}, fams, r), asse::ShapeError);
}

TEST_CASE("tensor basis on the unit square is orthonormal") {
  const std::vector<PolynomialFamily> fams{PolynomialFamily::legendre(0, 1), PolynomialFamily::legendre(0, 1)};
  std::vector<MultiIndex> idx;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) idx.push_back(MultiIndex{{a, b}});
  using Rule = boost::math::quadrature::gauss<double, 10>;
  for (const auto& u : idx)
    for (const auto& v : idx) {
      double ip = 0.0;
      for (std::size_t i = 0; i < Rule::abscissa().size(); ++i)
        for (std::size_t j = 0; j < Rule::abscissa().size(); ++j) {
          for (int si : {-1, 1})
            for (int sj : {-1, 1}) {
              if ((i == 0 && si < 0 && Rule::abscissa()[0] == 0.0) || (j == 0 && sj < 0 && Rule::abscissa()[0] == 0.0))
                continue;
              const double x = 0.5 + 0.5 * si * Rule::abscissa()[i];
              const double y = 0.5 + 0.5 * sj * Rule::abscissa()[j];
              const double w = 0.25 * Rule::weights()[i] * Rule::weights()[j];
              const std::vector<double> pt{x, y};
              ip += w * eval_multivariate(u, fams, pt) * eval_multivariate(v, fams, pt);
            }
        }
      CHECK(std::abs(ip - (u == v ? 1.0 : 0.0)) < 1e-9);
    }
}

TEST_CASE("design matrix agrees with pointwise evaluation") {
  const std::vector<PolynomialFamily> fams{PolynomialFamily::legendre(0, 0.5), PolynomialFamily::legendre(0.5, 1)};
  const std::vector<MultiIndex> basis{{{0, 0}}, {{1, 0}}, {{0, 3}}, {{2, 1}}};
  Eigen::MatrixXd pts(3, 2);
  pts << 0.1, 0.6, 0.4, 0.9, 0.0, 1.0;
  const auto psi = design_matrix(basis, fams, pts);
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 4; ++l) {
      const std::vector<double> p{pts(i, 0), pts(i, 1)};
      CHECK(psi(i, l) == Approx(eval_multivariate(basis[l], fams, p)).epsilon(1e-14));
    }
}
