#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "asse/errors.hpp"
#include "asse/pce/index_set.hpp"
#include "asse/pce/model.hpp"
#include "asse/pce/regression.hpp"
#include "asse/uncertainty/sampling.hpp"

using namespace asse::pce;
using asse::orthopoly::PolynomialFamily;
using doctest::Approx;

namespace {

// Brute-force enumeration over the full grid {0..H}^M, independent of the recursive generator.
std::size_t count_by_enumeration(std::size_t m, int h, double q) {
  std::size_t count = 0;
  std::vector<int> d(m, 0);
  while (true) {
    double s = 0.0;
    int total = 0;
    for (int v : d) {
      total += v;
      if (v > 0) s += std::pow(v, q);
    }
    if (total <= h && (s == 0.0 || std::pow(s, 1.0 / q) <= h + 1e-9)) ++count;
    std::size_t k = 0;
    while (k < m && ++d[k] > h) d[k++] = 0;
    if (k == m) break;
  }
  return count;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Mean of squared errors from n explicit OLS refits, each leaving one observation out.
double brute_force_loo(const Eigen::MatrixXd& x, const Eigen::VectorXd& z) {
  const Eigen::Index n = x.rows();
  double sum = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    Eigen::MatrixXd xm(n - 1, x.cols());
    Eigen::VectorXd zm(n - 1);
    for (Eigen::Index i = 0, r = 0; i < n; ++i) {
      if (i == m) continue;
      xm.row(r) = x.row(i);
      zm(r++) = z(i);
    }
    const Eigen::VectorXd c = xm.colPivHouseholderQr().solve(zm);
    const double e = z(m) - x.row(m).dot(c);
    sum += e * e;
  }
  return sum / static_cast<double>(n);
}

Eigen::MatrixXd unit_points(std::size_t n, std::size_t m) { return asse::uncertainty::sample_qmc(n, m, 1).points(); }

}  // namespace

TEST_CASE("hyperbolic index sets") {
  CHECK(hyperbolic_index_set(2, 2, 1.0).size() == 6);
  const auto half = hyperbolic_index_set(2, 2, 0.5);
  CHECK(half.size() == 5);
  CHECK(half.size() == count_by_enumeration(2, 2, 0.5));
  for (const auto& mi : half.indices) CHECK(mi != MultiIndex{{1, 1}});
  CHECK(hyperbolic_index_set(5, 0, 0.6).size() == 1);
  CHECK(hyperbolic_index_set(5, 0, 0.6).indices[0].is_zero());

  for (std::size_t m = 1; m <= 6; ++m)
    for (int h = 0; h <= 6; ++h) {
      CHECK(static_cast<double>(hyperbolic_index_set(m, h, 1.0).size()) == binomial(static_cast<int>(m) + h, h));
      for (double q : {0.5, 0.65, 0.8}) CHECK(hyperbolic_index_set(m, h, q).size() == count_by_enumeration(m, h, q));
    }

  const auto set = hyperbolic_index_set(3, 4, 0.7);
  CHECK(set.indices.front().is_zero());
  std::set<MultiIndex> unique(set.indices.begin(), set.indices.end());
  CHECK(unique.size() == set.size());
  for (std::size_t l = 1; l < set.size(); ++l) CHECK(asse::orthopoly::graded_less(set.indices[l - 1], set.indices[l]));
  for (const auto& mi : set.indices) CHECK(hyperbolic_norm(mi, 0.7) <= 4.0 + 1e-9);
  CHECK_THROWS_AS(hyperbolic_index_set(2, 2, 0.0), asse::DomainError);
  CHECK_THROWS_AS(hyperbolic_index_set(2, 2, 1.2), asse::DomainError);
}

TEST_CASE("loo error by hat matrix") {
  SUBCASE("two points, constant basis: each held-out prediction is the other point") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1);
    Eigen::VectorXd z(2);
    z << 0.0, 2.0;
    const auto fit = ols_fit(x, z);
    CHECK(loo_error(x, z, fit.coefficients).e_loo == Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("exact fit without unit leverage") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 0, 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd z = 2.0 * x.col(0) + 0.5 * x.col(1);
    const auto fit = ols_fit(x, z);
    const auto err = loo_error(x, z, fit.coefficients);
    CHECK(err.e_loo < 1e-28);
    CHECK_FALSE(err.interpolating);
  }
  SUBCASE("interpolation gives an infinite sentinel") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, 1, 1;
    Eigen::VectorXd z(2);
    z << 1.0, 3.0;
    const auto err = loo_error(x, z, ols_fit(x, z).coefficients);
    CHECK(err.interpolating);
    CHECK(std::isinf(err.e_loo));
  }
  SUBCASE("hat-matrix formula equals explicit refits") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd x(20, 6);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
      Eigen::VectorXd z(20);
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
      const auto fit = ols_fit(x, z);
      const double fast = loo_error(x, z, fit.coefficients).e_loo;
      const double slow = brute_force_loo(x, z);
      CHECK(std::abs(fast - slow) <= 1e-8 * slow);
    }
  }
  SUBCASE("corrected error formula") {
    CHECK(corrected_loo(0.5, 10, 2, 0.1) == Approx(0.5 * 10.0 / 8.0 * 1.1));
    CHECK(std::isinf(corrected_loo(0.5, 3, 3, 0.1)));
  }
}

TEST_CASE("ols drops rank-deficient columns") {
  Eigen::MatrixXd x(5, 3);
  x << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10;
  Eigen::VectorXd z(5);
  z << 1, 2, 3, 4, 5;
  const auto fit = ols_fit(x, z);
  CHECK(fit.columns.size() == 2);
  CHECK(fit.dropped.size() == 1);
}

TEST_CASE("hybrid LAR") {
  const auto pts = unit_points(30, 2);
  const auto fams = std::vector<PolynomialFamily>{PolynomialFamily::legendre(0, 1), PolynomialFamily::legendre(0, 1)};
  const auto set = hyperbolic_index_set(2, 3, 1.0);
  const Eigen::MatrixXd x = asse::orthopoly::design_matrix(set.indices, fams, pts);

  SUBCASE("recovers a single basis term") {
    Eigen::Index col = -1;
    for (std::size_t l = 0; l < set.size(); ++l)
      if (set.indices[l] == MultiIndex{{1, 0}}) col = static_cast<Eigen::Index>(l);
    const Eigen::VectorXd z = 3.0 * x.col(col);
    const auto fit = hybrid_lar_fit(x, z);
    bool found = false;
    for (std::size_t k = 0; k < fit.active.size(); ++k) {
      if (fit.active[k] == col) {
        found = true;
        CHECK(std::abs(fit.coefficients(static_cast<Eigen::Index>(k)) - 3.0) < 1e-8);
      } else {
        CHECK(std::abs(fit.coefficients(static_cast<Eigen::Index>(k))) < 1e-8);
      }
    }
    CHECK(found);
    // normal equations hold for the refitted set
    Eigen::MatrixXd xa(x.rows(), static_cast<Eigen::Index>(fit.active.size()));
    for (std::size_t k = 0; k < fit.active.size(); ++k) xa.col(static_cast<Eigen::Index>(k)) = x.col(fit.active[k]);
    const Eigen::VectorXd grad = xa.transpose() * (z - xa * fit.coefficients);
    CHECK(grad.norm() <= 1e-10 * xa.norm() * z.norm());
  }
  SUBCASE("constant response") {
    const Eigen::VectorXd z = Eigen::VectorXd::Constant(30, 7.0);
    const auto fit = hybrid_lar_fit(x, z);
    REQUIRE(fit.active.size() == 1);
    CHECK(fit.active[0] == 0);
    CHECK(fit.coefficients(0) == Approx(7.0).epsilon(1e-14));
  }
  SUBCASE("underdetermined: path length bounded by n - 1") {
    const auto few = unit_points(6, 2);
    const auto big = hyperbolic_index_set(2, 5, 1.0);
    const Eigen::MatrixXd xf = asse::orthopoly::design_matrix(big.indices, fams, few);
    Eigen::VectorXd z(6);
    for (int i = 0; i < 6; ++i) z(i) = std::sin(7.0 * few(i, 0)) + few(i, 1) * few(i, 1);
    const auto fit = hybrid_lar_fit(xf, z);
    CHECK(fit.active.size() - 1 <= 5);
    CHECK(fit.candidate_cloo.size() <= 6);
    CHECK(std::isfinite(fit.coefficients.sum()));
  }
  SUBCASE("all-zero column is dropped with a warning") {
    Eigen::MatrixXd xz = x;
    xz.col(2).setZero();
    Eigen::VectorXd z = x.col(1) + 0.5 * x.col(3);
    const auto fit = hybrid_lar_fit(xz, z);
    CHECK_FALSE(fit.warnings.empty());
    for (Eigen::Index c : fit.active) CHECK(c != 2);
  }
  SUBCASE("empty data") {
    CHECK_THROWS_AS(hybrid_lar_fit(Eigen::MatrixXd(0, 3), Eigen::VectorXd(0)), asse::EmptyDataError);
  }
}

TEST_CASE("adaptive fit") {
  const Box box = Box::unit(2);
  const auto pts = unit_points(60, 2);
  SUBCASE("quadratic target selects H = 2 with vanishing LOO error") {
    Eigen::VectorXd z(60);
    for (int i = 0; i < 60; ++i) {
      const double a = pts(i, 0), b = pts(i, 1);
      z(i) = 1.5 - 2.0 * a + 3.0 * a * a + 0.7 * b - 1.1 * b * b;
    }
    const auto model = adaptive_fit(pts, z, box);
    CHECK(model.order == 2);
    CHECK(model.e_loo < 1e-10);
    CHECK((model.evaluate(pts) - z).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("order grid {0} gives the sample mean") {
    Eigen::VectorXd z(60);
    for (int i = 0; i < 60; ++i) z(i) = std::exp(pts(i, 0)) * pts(i, 1);
    FitOptions opts;
    opts.orders = {0};
    const auto model = adaptive_fit(pts, z, box, opts);
    REQUIRE(model.basis.size() == 1);
    CHECK(model.coefficients(0) == Approx(z.mean()).epsilon(1e-14));
  }
  SUBCASE("selected error is the grid minimum of the corrected LOO errors") {
    Eigen::VectorXd z(60);
    for (int i = 0; i < 60; ++i) z(i) = std::tanh(4.0 * (pts(i, 0) - 0.4)) + 0.3 * std::cos(3.0 * pts(i, 1));
    AdaptiveFitReport report;
    const auto model = adaptive_fit(pts, z, box, {}, &report);
    CHECK(report.cells.size() == 49);
    double min_cloo = std::numeric_limits<double>::infinity();
    for (const auto& c : report.cells) min_cloo = std::min(min_cloo, c.e_cloo);
    CHECK(model.e_cloo == Approx(min_cloo).epsilon(1e-12));
    CHECK(model.e_loo <= model.e_cloo);
  }
  SUBCASE("degenerate grid falls back to the mean model") {
    Eigen::MatrixXd one(1, 2);
    one << 0.2, 0.3;
    Eigen::VectorXd z(1);
    z << 4.0;
    const auto model = adaptive_fit(one, z, box);
    CHECK(model.fallback);
    CHECK(model.coefficients(0) == 4.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(adaptive_fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), box), asse::EmptyDataError);
    FitOptions empty;
    empty.orders.clear();
    CHECK_THROWS_AS(adaptive_fit(pts, Eigen::VectorXd::Zero(60), box, empty), asse::DomainError);
  }
}

TEST_CASE("polynomial exactness on a sub-box") {
  const Box box{{0.5, 0.0, 0.25}, {1.0, 0.5, 0.5}};
  Eigen::MatrixXd pts = unit_points(150, 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = box.lower[j] + (box.upper[j] - box.lower[j]) * pts(i, j);
  PceModel truth;
  truth.domain = box;
  truth.basis = hyperbolic_index_set(3, 2, 1.0).indices;
  truth.coefficients = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(truth.basis.size()), -1.0, 2.0);
  const Eigen::VectorXd z = truth.evaluate(pts);
  const auto model = adaptive_fit(pts, z, box);
  CHECK(model.e_loo < 1e-10);
  for (std::size_t l = 0; l < truth.basis.size(); ++l) {
    double fitted = 0.0;
    for (std::size_t k = 0; k < model.basis.size(); ++k)
      if (model.basis[k] == truth.basis[l]) fitted = model.coefficients(static_cast<Eigen::Index>(k));
    CHECK(std::abs(fitted - truth.coefficients(static_cast<Eigen::Index>(l))) < 1e-8);
  }
}

TEST_CASE("moments and first-order Sobol' indices from coefficients") {
  PceModel m;
  m.domain = Box::unit(2);
  m.basis = {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}};
  m.coefficients = Eigen::Vector2d(5.0, 2.0);
  CHECK(pce_moments(m).mean == 5.0);
  CHECK(pce_moments(m).variance == 4.0);

  PceModel c = m;
  c.basis = {MultiIndex{{0, 0}}};
  c.coefficients = Eigen::VectorXd::Constant(1, 3.0);
  CHECK(pce_moments(c).variance == 0.0);
  const auto deg = sobol_first_order(c);
  CHECK(deg.degenerate);
  CHECK(deg.first_order[0] == 0.5);

  PceModel s = m;
  s.basis = {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}, MultiIndex{{0, 1}}};
  s.coefficients = Eigen::Vector3d(0.0, 2.0, 1.0);
  const auto idx = sobol_first_order(s);
  CHECK(idx.first_order[0] == Approx(0.8));
  CHECK(idx.first_order[1] == Approx(0.2));

  PceModel inter = m;
  inter.basis = {MultiIndex{{0, 0}}, MultiIndex{{1, 1}}};
  inter.coefficients = Eigen::Vector2d(1.0, 0.3);
  const auto ii = sobol_first_order(inter);
  CHECK(ii.first_order[0] == 0.0);
  CHECK(ii.first_order[1] == 0.0);
}

TEST_CASE("moments agree with Monte Carlo on the surrogate") {
  PceModel m;
  m.domain = Box::unit(3);
  m.basis = hyperbolic_index_set(3, 3, 0.7).indices;
  m.coefficients = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(m.basis.size()), 0.5, -0.9);
  const auto mom = pce_moments(m);

  const Eigen::Index n = 1000000;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd pts(n, 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = u(rng);
  const Eigen::VectorXd y = m.evaluate(pts);
  const double mean = y.mean();
  const Eigen::ArrayXd dev = y.array() - mean;
  const double var = dev.square().sum() / static_cast<double>(n - 1);
  const double mu4 = dev.pow(4).mean();
  CHECK(std::abs(mean - mom.mean) < 3.0 * std::sqrt(var / n));
  CHECK(std::abs(var - mom.variance) < 3.0 * std::sqrt((mu4 - var * var) / n));
}

TEST_CASE("properties over random models") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const auto basis = hyperbolic_index_set(3, 4, 0.75).indices;
  for (int trial = 0; trial < 50; ++trial) {
    PceModel a;
    a.domain = Box::unit(3);
    a.basis = basis;
    a.coefficients.resize(static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index l = 0; l < a.coefficients.size(); ++l) a.coefficients(l) = normal(rng);
    PceModel b = a;
    for (Eigen::Index l = 0; l < b.coefficients.size(); ++l) b.coefficients(l) = normal(rng);
    PceModel sum = a;
    sum.coefficients = a.coefficients + b.coefficients;

    double total = 0.0;
    for (double s : sobol_first_order(a).first_order) {
      CHECK(s >= 0.0);
      total += s;
    }
    CHECK(total <= 1.0 + 1e-12);

    const std::vector<double> p{0.1 * (trial % 10), 0.33, 0.9};
    CHECK(sum.evaluate(p) == Approx(a.evaluate(p) + b.evaluate(p)).epsilon(1e-12));
  }
}
