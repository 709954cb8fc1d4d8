#include <doctest.h>

#include <cmath>
#include <set>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "asse/errors.hpp"
#include "asse/uncertainty/marginal.hpp"
#include "asse/uncertainty/sampling.hpp"

using namespace asse::uncertainty;
using doctest::Approx;

TEST_CASE("marginal closed forms") {
  const MarginalDistribution gauss(Gaussian{100.0, 5.0});
  CHECK(gauss.eval(0.5, EvalMode::Quantile) == Approx(100.0).epsilon(1e-14));
  CHECK(gauss.cdf(100.0) == Approx(0.5).epsilon(1e-15));

  const double lambda = 11.153;
  const MarginalDistribution weib(Weibull{lambda, 3.289});
  CHECK(weib.cdf(lambda) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(weib.cdf(lambda) == Approx(0.632121).epsilon(1e-6));

  const MarginalDistribution uni(Uniform{0.0, 1.0});
  CHECK(uni.cdf(0.3) == 0.3);
  CHECK(uni.quantile(0.3) == Approx(0.3).epsilon(1e-15));
}

TEST_CASE("beta pdf integrates to one (tanh-sinh quadrature oracle)") {
  const MarginalDistribution beta(Beta{1.7, 0.74});
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double total = integrator.integrate([&](double x) { return beta.pdf(x); }, 0.0, 1.0);
  CHECK(std::abs(total - 1.0) < 1e-8);
  CHECK(beta.mean() == Approx(1.7 / (1.7 + 0.74)).epsilon(1e-14));
}

TEST_CASE("invalid parameters and quantile endpoints raise domain errors") {
  CHECK_THROWS_AS(MarginalDistribution(Gaussian{0.0, 0.0}), asse::DomainError);
  CHECK_THROWS_AS(MarginalDistribution(Weibull{-1.0, 2.0}), asse::DomainError);
  CHECK_THROWS_AS(MarginalDistribution(Beta{1.0, 0.0}), asse::DomainError);
  CHECK_THROWS_AS(MarginalDistribution(Uniform{1.0, 1.0}), asse::DomainError);

  const MarginalDistribution gauss(Gaussian{0.0, 1.0});
  CHECK_THROWS_AS(gauss.eval(0.0, EvalMode::Quantile), asse::DomainError);
  CHECK_THROWS_AS(gauss.eval(1.0, EvalMode::Quantile), asse::DomainError);
  CHECK_THROWS_AS(gauss.quantile(1.5), asse::DomainError);
  const MarginalDistribution weib(Weibull{2.0, 2.0});
  CHECK_THROWS_AS(weib.quantile(1.0), asse::DomainError);
  CHECK(weib.quantile(0.0) == 0.0);
  CHECK_THROWS_AS(gauss.pdf(std::nan("")), asse::DomainError);
}

TEST_CASE("cdf(quantile(p)) == p for every marginal kind") {
  const std::vector<MarginalDistribution> ms{Gaussian{90.0, 4.5}, Weibull{11.153, 3.289}, Beta{1.7, 0.74},
                                             Uniform{-2.0, 5.0}, Weibull{3.289, 11.153}};
  for (const auto& m : ms) {
    for (double p = 0.001; p < 1.0; p += 0.0137) {
      CHECK(std::abs(m.cdf(m.quantile(p)) - p) < 1e-10);
    }
    // cdf monotone and in [0,1]
    double prev = 0.0;
    for (double p = 0.01; p < 1.0; p += 0.01) {
      const double x = m.quantile(p);
      const double c = m.cdf(x);
      CHECK(c >= prev);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      prev = c;
    }
  }
}

TEST_CASE("sobol sequence matches the reference direction-number implementation") {
  // Frozen from scipy.stats.qmc.Sobol(d, scramble=False), which ships the same Joe-Kuo table.
  const auto first = sample_qmc(1, 5, 1);
  for (int j = 0; j < 5; ++j) CHECK(first(0, j) == 0.5);

  const auto pts = sample_qmc(7, 5, 9);
  const double expected[7][5] = {{0.6875, 0.8125, 0.4375, 0.9375, 0.0625}, {0.9375, 0.0625, 0.6875, 0.1875, 0.3125},
                                 {0.4375, 0.5625, 0.1875, 0.6875, 0.8125}, {0.3125, 0.1875, 0.3125, 0.5625, 0.9375},
                                 {0.8125, 0.6875, 0.8125, 0.0625, 0.4375}, {0.5625, 0.4375, 0.0625, 0.8125, 0.1875},
                                 {0.0625, 0.9375, 0.5625, 0.3125, 0.6875}};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) CHECK(pts(i, j) == expected[i][j]);

  const double at1000[32] = {
      0.2197265625, 0.0966796875, 0.5185546875, 0.6767578125, 0.2802734375, 0.9072265625, 0.0458984375, 0.8994140625,
      0.5009765625, 0.0693359375, 0.0849609375, 0.2548828125, 0.1611328125, 0.3837890625, 0.1435546875, 0.3701171875,
      0.7197265625, 0.3447265625, 0.9912109375, 0.7255859375, 0.5224609375, 0.5498046875, 0.9501953125, 0.5400390625,
      0.5830078125, 0.9072265625, 0.0400390625, 0.9794921875, 0.0595703125, 0.3408203125, 0.1474609375, 0.1455078125};
  const double at1001[32] = {
      0.7197265625, 0.5966796875, 0.0185546875, 0.1767578125, 0.7802734375, 0.4072265625, 0.5458984375, 0.3994140625,
      0.0009765625, 0.5693359375, 0.5849609375, 0.7548828125, 0.6611328125, 0.8837890625, 0.6435546875, 0.8701171875,
      0.2197265625, 0.8447265625, 0.4912109375, 0.2255859375, 0.0224609375, 0.0498046875, 0.4501953125, 0.0400390625,
      0.0830078125, 0.4072265625, 0.5400390625, 0.4794921875, 0.5595703125, 0.8408203125, 0.6474609375, 0.6455078125};
  const auto deep = sample_qmc(2, 32, 1000);
  for (int j = 0; j < 32; ++j) {
    CHECK(deep(0, j) == at1000[j]);
    CHECK(deep(1, j) == at1001[j]);
  }
}

TEST_CASE("sobol stratification, range and reproducibility") {
  for (int k = 1; k <= 10; ++k) {
    const std::size_t n = std::size_t{1} << k;
    const auto pts = sample_qmc(n, 1, 0);
    std::set<long> cells;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) cells.insert(static_cast<long>(std::floor(pts(i, 0) * n)));
    CHECK(cells.size() == n);
  }
  const auto a = sample_qmc(500, 7, 1);
  const auto b = sample_qmc(500, 7, 1);
  CHECK((a.points().array() == b.points().array()).all());
  CHECK(a.points().minCoeff() >= 0.0);
  CHECK(a.points().maxCoeff() < 1.0);
  CHECK_THROWS_AS(sample_qmc(4, 33, 1), asse::UnsupportedError);
  CHECK_THROWS_AS(sample_qmc(0, 3, 1), asse::EmptyDataError);
}

TEST_CASE("isoprobabilistic transforms") {
  const RandomVector rv({Gaussian{100.0, 5.0}, Beta{1.7, 0.74}, Weibull{11.153, 3.289}, Uniform{0.0, 1.0}});
  const auto u = sample_qmc(256, 4, 1);
  const auto x = to_physical(u, rv);
  const auto back = to_unit(x, rv);
  CHECK((back.points() - u.points()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((x.points().col(3) - u.points().col(3)).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd half(1, 4);
  half << 0.5, 0.5, 0.5, 0.5;
  CHECK(to_physical(SampleMatrix(half, SampleSpace::Unit), rv)(0, 0) == Approx(100.0).epsilon(1e-14));

  Eigen::MatrixXd tiny(1, 4);
  tiny << 0.5, 1e-12, 0.5, 0.5;
  CHECK(to_physical(SampleMatrix(tiny, SampleSpace::Unit), rv)(0, 1) < 1e-6);

  Eigen::MatrixXd phys(2, 4);
  phys << 95.0, 0.2, 5.0, 0.1, 101.0, 0.3, 6.0, 0.2;
  const auto pu = to_unit(SampleMatrix(phys, SampleSpace::Physical), rv);
  for (int j = 0; j < 4; ++j) CHECK(pu(0, j) <= pu(1, j));

  CHECK_THROWS_AS(to_physical(x, rv), asse::DomainError);
  CHECK_THROWS_AS(SampleMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0), SampleSpace::Unit), asse::DomainError);
}

TEST_CASE("joint density is the product of marginals") {
  const RandomVector rv({Gaussian{0.0, 1.0}, Beta{2.0, 3.0}});
  for (double a = -2.0; a <= 2.0; a += 0.5)
    for (double b = 0.05; b < 1.0; b += 0.15)
      CHECK(rv.joint_pdf({a, b}) == Approx(rv[0].pdf(a) * rv[1].pdf(b)).epsilon(1e-15));
}
