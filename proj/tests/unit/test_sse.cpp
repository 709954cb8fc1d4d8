#include <doctest.h>

#include <cmath>
#include <random>

#include "asse/errors.hpp"
#include "asse/pce/index_set.hpp"
#include "asse/sse/document.hpp"
#include "asse/sse/tree.hpp"

using namespace asse;
using namespace asse::sse;
using pce::MultiIndex;
using uncertainty::SampleMatrix;
using uncertainty::SampleSpace;

namespace {

pce::PceModel make_model(const pce::Box& box, std::vector<MultiIndex> basis, std::vector<double> coef, double e_loo) {
  pce::PceModel m;
  m.domain = box;
  m.basis = std::move(basis);
  m.coefficients = Eigen::Map<Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  m.e_loo = e_loo;
  return m;
}

double nrmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  const double n = static_cast<double>(truth.size());
  return (n - 1.0) / n * (truth - pred).squaredNorm() / (truth.array() - truth.mean()).square().sum();
}

}  // namespace

TEST_CASE("refinement score") {
  SseTree tree(2, {});
  CHECK_THROWS_AS(refinement_score(tree, 0), StateError);
  tree.node(0).expansion = make_model(pce::Box::unit(2), {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}}, {0.0, 1.0}, 0.2);
  tree.node(0).e_loo = 0.2;
  CHECK(refinement_score(tree, 0) == doctest::Approx(0.2));
  const auto [lo, hi] = split_node(tree, 0);
  tree.node(lo).expansion = make_model(tree.node(lo).domain, {MultiIndex{{0, 0}}}, {1.0}, 0.1);
  CHECK(refinement_score(tree, lo) == doctest::Approx(0.05));
  CHECK(refinement_score(tree, hi) == doctest::Approx(0.1));
  tree.node(hi).expansion = make_model(tree.node(hi).domain, {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}}, {0.0, 1.0}, 0.2);
  tree.node(hi).e_loo = 0.2;
  const auto [a, b] = split_node(tree, hi);
  CHECK(tree.node(a).mass() == 0.25);
  CHECK(refinement_score(tree, a) == doctest::Approx(0.05));
  tree.node(b).expansion = make_model(tree.node(b).domain, {MultiIndex{{0, 0}}}, {1.0}, 0.0);
  CHECK(refinement_score(tree, b) == 0.0);
}

TEST_CASE("split geometry and direction") {
  SseTree tree(2, {});
  tree.node(0).expansion =
      make_model(pce::Box::unit(2), {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}, MultiIndex{{0, 1}}}, {0.0, 2.0, 1.0}, 0.1);
  const auto [lo, hi] = split_node(tree, 0);
  CHECK(*tree.node(0).split_dim == 0);
  CHECK(tree.node(lo).domain == pce::Box{{0.0, 0.0}, {0.5, 1.0}});
  CHECK(tree.node(hi).domain == pce::Box{{0.5, 0.0}, {1.0, 1.0}});
  CHECK(tree.node(lo).mass() == 0.5);
  CHECK(tree.node(hi).mass() == 0.5);
  CHECK(tree.node(lo).level == 1);
  CHECK(tree.node(lo).index == 1);
  CHECK(tree.node(hi).index == 2);

  tree.node(hi).expansion =
      make_model(tree.node(hi).domain, {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}, MultiIndex{{0, 1}}}, {0.0, 0.1, 3.0}, 0.1);
  const auto [a, b] = split_node(tree, hi);
  CHECK(*tree.node(hi).split_dim == 1);
  CHECK(tree.node(a).domain == pce::Box{{0.5, 0.0}, {1.0, 0.5}});
  CHECK(tree.node(b).domain == pce::Box{{0.5, 0.5}, {1.0, 1.0}});
  CHECK(tree.node(a).mass() == 0.25);
  CHECK(tree.node(b).mass() == 0.25);
  CHECK(tree.node(a).level == 2);
  CHECK(tree.node(a).index == 1);

  // zero variance: widest side wins
  tree.node(lo).expansion = make_model(tree.node(lo).domain, {MultiIndex{{0, 0}}}, {4.0}, 0.1);
  split_node(tree, lo);
  CHECK(*tree.node(lo).split_dim == 1);

  CHECK_THROWS_AS(split_node(tree, 0), StateError);
  CHECK_THROWS_AS(split_node(tree, a), StateError);

  const std::vector<double> on_plane{0.5, 0.5};
  CHECK(tree.locate(on_plane) == b);
}

TEST_CASE("refinement selection") {
  SseConfig cfg;
  cfg.n_ref_min = 1;
  SseTree tree(1, cfg);
  tree.set_training_data(Eigen::Vector4d(0.1, 0.3, 0.6, 0.8), Eigen::Vector4d::Zero());
  CHECK_FALSE(select_refinement_domain(tree));
  auto& root = tree.node(0);
  root.expansion = make_model(pce::Box::unit(1), {MultiIndex{{0}}, MultiIndex{{1}}}, {0.0, 1.0}, 0.3);
  root.rows = {0, 1, 2, 3};
  root.residuals = Eigen::Vector4d::Zero();
  CHECK(*select_refinement_domain(tree) == 0);

  const auto [lo, hi] = split_node(tree, 0);
  for (NodeId id : {lo, hi}) {
    tree.node(id).expansion = make_model(tree.node(id).domain, {MultiIndex{{0}}, MultiIndex{{1}}}, {0.0, 1.0}, 0.1);
    tree.node(id).rows = {0, 1};
  }
  tree.node(lo).score = 0.05;
  tree.node(hi).score = 0.05;
  CHECK(*select_refinement_domain(tree) == lo);
  tree.node(hi).score = 0.2;
  CHECK(*select_refinement_domain(tree) == hi);
  const auto [a, b] = split_node(tree, lo);
  for (NodeId id : {a, b}) {
    tree.node(id).expansion = make_model(tree.node(id).domain, {MultiIndex{{0}}}, {0.0}, 0.0);
    tree.node(id).rows = {0, 1};
  }
  tree.node(a).score = 0.01;
  tree.node(b).score = 0.2;
  CHECK(*select_refinement_domain(tree) == hi);
  tree.node(hi).rows = {0};
  CHECK(*select_refinement_domain(tree) == b);
}

TEST_CASE("small designs give a root-only tree") {
  const auto pts = uncertainty::sample_qmc(15, 2, 1);
  Eigen::VectorXd z(15);
  for (int i = 0; i < 15; ++i) z(i) = std::sin(3.0 * pts(i, 0)) + pts(i, 1);
  const auto tree = fit_asse(pts, z);
  CHECK(tree.nodes().size() == 1);
  const auto probe = uncertainty::sample_qmc(64, 2, 1000);
  const Eigen::VectorXd a = evaluate_sse(tree, probe).values;
  const Eigen::VectorXd b = tree.root().expansion->evaluate(probe.points());
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS_AS(fit_asse(uncertainty::sample_qmc(0, 2, 1), Eigen::VectorXd(0)), EmptyDataError);
}

TEST_CASE("exact root fit leaves nothing for the children") {
  const auto pts = uncertainty::sample_qmc(80, 2, 1);
  Eigen::VectorXd z(80);
  for (int i = 0; i < 80; ++i) z(i) = 1.0 + pts(i, 0) - 2.0 * pts(i, 1) * pts(i, 1);
  auto tree = init_asse(pts, z);
  CHECK(tree.root().e_loo < 1e-10);
  CHECK(tree.root().score < 1e-10);
  refine_step(tree);
  for (NodeId id : tree.terminals()) CHECK(tree.node(id).residuals.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(compute_residuals(tree, 0, pts.points(), z) == z);
}

TEST_CASE("residuals subtract strict ancestors only") {
  const auto pts = uncertainty::sample_qmc(200, 2, 1);
  Eigen::VectorXd z(200);
  for (int i = 0; i < 200; ++i) z(i) = std::exp(2.0 * pts(i, 0)) * std::cos(4.0 * pts(i, 1)) + (pts(i, 0) > 0.6);
  SseConfig cfg;
  cfg.fit.orders = {0, 1, 2, 3};
  auto tree = init_asse(pts, z, cfg);
  refine_step(tree);
  refine_step(tree);
  REQUIRE(tree.depth() == 2);
  NodeId deep = kNoNode;
  for (NodeId id : tree.terminals())
    if (tree.node(id).level == 2) deep = id;
  const auto& n = tree.node(deep);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n.rows.size()), 2);
  Eigen::VectorXd zz(x.rows());
  for (std::size_t i = 0; i < n.rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = pts.points().row(n.rows[i]);
    zz(static_cast<Eigen::Index>(i)) = z(n.rows[i]);
  }
  const auto& parent = tree.node(n.parent);
  const Eigen::VectorXd expected = zz - tree.root().expansion->evaluate(x) - parent.expansion->evaluate(x);
  const Eigen::VectorXd got = compute_residuals(tree, deep, x, zz);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((got - n.residuals).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd outside = x.topRows(1);
  outside(0, static_cast<Eigen::Index>(*parent.split_dim)) = n.domain.lower[*parent.split_dim] > 0 ? 0.0 : 0.99;
  CHECK_THROWS_AS(compute_residuals(tree, deep, outside, zz.head(1)), DomainError);
}

TEST_CASE("one-dimensional step") {
  const auto pts = uncertainty::sample_qmc(200, 1, 1);
  Eigen::VectorXd z(200);
  for (int i = 0; i < 200; ++i) z(i) = pts(i, 0) > 0.7 ? 1.0 : 0.0;
  auto tree = init_asse(pts, z);
  REQUIRE(refine_step(tree));
  CHECK(*tree.root().split_dim == 0);
  // the upper half holds the jump and must be refined next
  const auto next = select_refinement_domain(tree);
  REQUIRE(next);
  CHECK(tree.node(*next).domain.lower[0] == 0.5);
  while (refine_step(tree)) {
  }
  CHECK(tree.terminals().size() >= 2);

  const auto val = uncertainty::sample_qmc(10000, 1, 1u << 16);
  Eigen::VectorXd truth(10000);
  for (int i = 0; i < 10000; ++i) truth(i) = val(i, 0) > 0.7 ? 1.0 : 0.0;
  const double e_sse = nrmse(truth, evaluate_sse(tree, val).values);
  const auto global = pce::adaptive_fit(pts.points(), z, pce::Box::unit(1));
  const double e_pce = nrmse(truth, global.evaluate(val.points()));
  // frozen from the first run of this configuration
  CHECK(e_pce == doctest::Approx(0.106476).epsilon(1e-4));
  CHECK(e_sse == doctest::Approx(0.018685).epsilon(1e-4));
  CHECK(e_sse * 5.0 <= e_pce);
}

TEST_CASE("structural invariants over random fits") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const std::size_t n = 40 + 20 * static_cast<std::size_t>(trial % 5);
    const auto pts = uncertainty::sample_qmc(n, m, 1 + static_cast<std::uint64_t>(trial) * 97);
    const double jump = 0.2 + 0.6 * u(rng);
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) = (pts(i, 0) > jump ? 1.0 : 0.0) + u(rng) * 0.01;
      for (std::size_t j = 1; j < m; ++j) z(i) += std::sin(5.0 * pts(i, static_cast<Eigen::Index>(j)));
    }
    SseConfig cfg;
    cfg.n_ref_min = 5;
    cfg.k_max = 4;
    cfg.fit.orders = {0, 1, 2, 3};
    auto tree = init_asse(pts, z, cfg);
    double prev = training_sse(tree);
    while (refine_step(tree)) {
      const double now = training_sse(tree);
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
    CHECK(tree.depth() <= cfg.k_max);

    for (const auto& node : tree.nodes()) {
      if (node.terminal()) continue;
      const auto& a = tree.node(node.children[0]);
      const auto& b = tree.node(node.children[1]);
      CHECK(a.mass() + b.mass() == node.mass());
      CHECK(std::abs(a.mass() - node.mass() / 2) <= 1e-14);
    }

    const auto terms = tree.terminals();
    for (int probe = 0; probe < 200; ++probe) {
      std::vector<double> p(m);
      for (auto& v : p) v = u(rng);
      if (probe % 10 == 0) p[0] = 0.5;
      if (probe % 20 == 0) p[0] = 1.0;
      int claimed = 0;
      NodeId owner = kNoNode;
      for (NodeId id : terms)
        if (tree.node(id).domain.contains(p)) {
          ++claimed;
          owner = id;
        }
      CHECK(claimed == 1);
      CHECK(owner == tree.locate(p));
    }

    // embedding identity at the training points
    const Eigen::VectorXd fitted = evaluate_sse(tree, pts).values;
    for (NodeId id : terms) {
      const auto& node = tree.node(id);
      Eigen::MatrixXd x(static_cast<Eigen::Index>(node.rows.size()), static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < node.rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = pts.points().row(node.rows[i]);
      Eigen::VectorXd left = node.residuals;
      if (node.expansion) left -= node.expansion->evaluate(x);
      for (std::size_t i = 0; i < node.rows.size(); ++i)
        CHECK(std::abs(fitted(node.rows[i]) - (z(node.rows[i]) - left(static_cast<Eigen::Index>(i)))) < 1e-10);
    }
  }
}

TEST_CASE("evaluation clamps and transforms") {
  const auto pts = uncertainty::sample_qmc(60, 2, 1);
  Eigen::VectorXd z(60);
  for (int i = 0; i < 60; ++i) z(i) = pts(i, 0) * pts(i, 1) + (pts(i, 1) > 0.3 ? 0.5 : 0.0);
  const uncertainty::RandomVector rv({uncertainty::Gaussian{1.0, 2.0}, uncertainty::Weibull{2.0, 3.0}});
  const auto tree = fit_asse(pts, z, {}, rv);

  Eigen::MatrixXd out(3, 2);
  out << -0.1, 0.5, 0.2, 1.3, 0.4, 0.4;
  const auto ev = evaluate_sse(tree, out);
  CHECK(ev.clamped == 2);
  Eigen::MatrixXd in(3, 2);
  in << 0.0, 0.5, 0.2, 1.0, 0.4, 0.4;
  CHECK(ev.values == evaluate_sse(tree, in).values);

  const auto phys = uncertainty::to_physical(uncertainty::sample_qmc(50, 2, 500), rv);
  const auto back = uncertainty::to_unit(phys, rv);
  CHECK(evaluate_sse(tree, phys).values == evaluate_sse(tree, back).values);
  CHECK_THROWS_AS(evaluate_sse(fit_asse(pts, z), phys), StateError);
}

TEST_CASE("surrogate document round trip") {
  const auto pts = uncertainty::sample_qmc(120, 3, 1);
  Eigen::VectorXd z(120);
  for (int i = 0; i < 120; ++i) z(i) = std::exp(pts(i, 0)) + (pts(i, 1) > 0.4 ? 2.0 : 0.0) * pts(i, 2);
  const uncertainty::RandomVector rv(
      {uncertainty::Weibull{11.153, 3.289}, uncertainty::Beta{1.7, 0.74}, uncertainty::Gaussian{90.0, 4.5}});
  const auto tree = fit_asse(pts, z, {}, rv);
  REQUIRE(tree.nodes().size() > 1);
  const auto text = to_document(tree).dump(1);
  const auto back = from_document(nlohmann::json::parse(text));
  CHECK(back.nodes().size() == tree.nodes().size());
  CHECK(to_document(back).dump(1) == text);

  const auto probe = uncertainty::sample_qmc(500, 3, 4000);
  const Eigen::VectorXd a = evaluate_sse(tree, probe).values;
  const Eigen::VectorXd b = evaluate_sse(back, probe).values;
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
  const auto phys = uncertainty::to_physical(probe, rv);
  CHECK((evaluate_sse(back, phys).values - evaluate_sse(tree, phys).values).cwiseAbs().maxCoeff() <= 1e-12);

  auto doc = nlohmann::json::parse(text);
  doc["version"] = 99;
  CHECK_THROWS_AS(from_document(doc), UnsupportedError);
  doc["version"] = kDocumentVersion;
  doc["nodes"][0].erase("lower");
  CHECK_THROWS_AS(from_document(doc), ParseError);
}
