#include "asse/sse/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "asse/errors.hpp"

namespace asse::sse {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

void fit_node(SseTree& tree, NodeId id) {
  SseNode& n = tree.node(id);
  const Eigen::MatrixXd x = gather_rows(tree.training_points(), n.rows);
  n.expansion = pce::adaptive_fit(x, n.residuals, n.domain, tree.config().fit);
  n.e_loo = n.expansion->e_loo;
}

}  // namespace

SseTree::SseTree(std::size_t dimension, SseConfig config, std::optional<uncertainty::RandomVector> rv)
    : dimension_(dimension), config_(std::move(config)), rv_(std::move(rv)) {
  if (dimension_ == 0) throw ShapeError("SseTree: dimension must be positive");
  if (rv_ && rv_->dimension() != dimension_) throw ShapeError("SseTree: random vector dimension mismatch");
  if (config_.k_max < 0) throw DomainError("SseTree: K_max must be non-negative");
  SseNode root;
  root.domain = Subdomain::unit(dimension_);
  add_node(std::move(root));
}

NodeId SseTree::add_node(SseNode node) {
  const auto level = static_cast<std::size_t>(node.level);
  if (next_index_.size() <= level) next_index_.resize(level + 1, 1);
  node.index = next_index_[level]++;
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

void SseTree::set_training_data(Eigen::MatrixXd points, Eigen::VectorXd z) {
  if (points.rows() != z.size()) throw ShapeError("SseTree: point count != response count");
  if (static_cast<std::size_t>(points.cols()) != dimension_) throw ShapeError("SseTree: point dimension mismatch");
  points_ = std::move(points);
  z_ = std::move(z);
}

std::vector<NodeId> SseTree::terminals() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].terminal()) out.push_back(i);
  return out;
}

NodeId SseTree::locate(std::span<const double> point) const {
  if (point.size() != dimension_) throw ShapeError("SseTree::locate: dimension mismatch");
  NodeId id = 0;
  while (!nodes_[id].terminal()) {
    const auto& n = nodes_[id];
    const std::size_t j = *n.split_dim;
    id = point[j] < nodes_[n.children[0]].domain.upper[j] ? n.children[0] : n.children[1];
  }
  return id;
}

int SseTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.level);
  return d;
}

bool SseTree::splittable(NodeId id) const {
  const auto& n = nodes_.at(id);
  return n.terminal() && n.expansion && n.level < config_.k_max && n.rows.size() >= 2 * config_.n_ref_min;
}

Eigen::VectorXd compute_residuals(const SseTree& tree, NodeId id, const Eigen::MatrixXd& points,
                                  const Eigen::VectorXd& z_raw) {
  if (points.rows() != z_raw.size()) throw ShapeError("compute_residuals: point count != response count");
  const auto& node = tree.node(id);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd p = points.row(i).transpose();
    if (!node.domain.contains(std::span<const double>(p.data(), static_cast<std::size_t>(p.size()))))
      throw DomainError("compute_residuals: point " + std::to_string(i) + " lies outside the node domain");
  }
  Eigen::VectorXd r = z_raw;
  for (NodeId a = node.parent; a != kNoNode; a = tree.node(a).parent)
    if (const auto& e = tree.node(a).expansion) r -= e->evaluate(points);
  return r;
}

double refinement_score(const SseTree& tree, NodeId id) {
  const auto& n = tree.node(id);
  if (n.expansion) return n.expansion->e_loo * n.mass();
  if (n.parent == kNoNode) throw StateError("refinement_score: root has no expansion");
  return tree.node(n.parent).e_loo * n.mass();
}

std::optional<NodeId> select_refinement_domain(const SseTree& tree) {
  std::optional<NodeId> best;
  for (NodeId id : tree.terminals()) {
    if (!tree.splittable(id)) continue;
    if (!best) {
      best = id;
      continue;
    }
    const auto& a = tree.node(id);
    const auto& b = tree.node(*best);
    if (a.score > b.score || (a.score == b.score && std::pair(a.level, a.index) < std::pair(b.level, b.index)))
      best = id;
  }
  return best;
}

std::pair<NodeId, NodeId> split_node(SseTree& tree, NodeId id) {
  {
    const auto& n = tree.node(id);
    if (!n.terminal()) throw StateError("split_node: node is already split");
    if (!n.expansion) throw StateError("split_node: node has no expansion");
  }
  const SseNode parent = tree.node(id);
  const std::size_t m = tree.dimension();

  std::size_t dim = 0;
  const auto sobol = pce::sobol_first_order(*parent.expansion);
  if (sobol.degenerate) {
    for (std::size_t j = 1; j < m; ++j)
      if (parent.domain.upper[j] - parent.domain.lower[j] > parent.domain.upper[dim] - parent.domain.lower[dim]) dim = j;
  } else {
    for (std::size_t j = 1; j < m; ++j)
      if (sobol.first_order[j] > sobol.first_order[dim]) dim = j;
  }
  const double mid = 0.5 * (parent.domain.lower[dim] + parent.domain.upper[dim]);

  std::array<SseNode, 2> kids;
  for (auto& k : kids) {
    k.level = parent.level + 1;
    k.parent = id;
    k.domain = parent.domain;
    k.e_loo = parent.e_loo;
  }
  kids[0].domain.upper[dim] = mid;
  kids[1].domain.lower[dim] = mid;

  if (!parent.rows.empty()) {
    const auto& pts = tree.training_points();
    const Eigen::MatrixXd x = gather_rows(pts, parent.rows);
    const Eigen::VectorXd passed = parent.residuals - parent.expansion->evaluate(x);
    std::array<std::vector<Eigen::Index>, 2> local;
    for (std::size_t i = 0; i < parent.rows.size(); ++i) {
      const int side = pts(parent.rows[i], static_cast<Eigen::Index>(dim)) < mid ? 0 : 1;
      kids[side].rows.push_back(parent.rows[i]);
      local[side].push_back(static_cast<Eigen::Index>(i));
    }
    for (int s = 0; s < 2; ++s) {
      kids[s].residuals.resize(static_cast<Eigen::Index>(local[s].size()));
      for (std::size_t i = 0; i < local[s].size(); ++i) kids[s].residuals(static_cast<Eigen::Index>(i)) = passed(local[s][i]);
    }
  }
  for (auto& k : kids) k.score = k.e_loo * k.mass();

  const NodeId lo = tree.add_node(std::move(kids[0]));
  const NodeId hi = tree.add_node(std::move(kids[1]));
  auto& p = tree.node(id);
  p.children = {lo, hi};
  p.split_dim = dim;
  return {lo, hi};
}

SseTree init_asse(const uncertainty::SampleMatrix& points, const Eigen::VectorXd& z, const SseConfig& config,
                  std::optional<uncertainty::RandomVector> rv) {
  if (points.space() != uncertainty::SampleSpace::Unit) throw DomainError("fit_asse: training points must be in unit space");
  if (points.rows() == 0 || z.size() == 0) throw EmptyDataError("fit_asse: no training points");
  if (points.rows() != z.size()) throw ShapeError("fit_asse: point count != response count");

  SseTree tree(static_cast<std::size_t>(points.cols()), config, std::move(rv));
  tree.set_training_data(points.points(), z);
  auto& root = tree.node(0);
  root.rows.resize(static_cast<std::size_t>(z.size()));
  std::iota(root.rows.begin(), root.rows.end(), Eigen::Index{0});
  root.residuals = z;
  fit_node(tree, 0);
  tree.node(0).score = refinement_score(tree, 0);
  return tree;
}

bool refine_step(SseTree& tree) {
  const auto sel = select_refinement_domain(tree);
  if (!sel) return false;
  const auto [lo, hi] = split_node(tree, *sel);
  for (NodeId c : {lo, hi}) {
    if (tree.node(c).rows.size() >= tree.config().n_ref_min) fit_node(tree, c);
    tree.node(c).score = refinement_score(tree, c);
  }
  return true;
}

SseTree fit_asse(const uncertainty::SampleMatrix& points, const Eigen::VectorXd& z, const SseConfig& config,
                 std::optional<uncertainty::RandomVector> rv) {
  SseTree tree = init_asse(points, z, config, std::move(rv));
  while (refine_step(tree)) {
  }
  return tree;
}

SseEvaluation evaluate_sse(const SseTree& tree, const Eigen::MatrixXd& unit_points) {
  if (static_cast<std::size_t>(unit_points.cols()) != tree.dimension())
    throw ShapeError("evaluate_sse: point dimension mismatch");
  SseEvaluation out;
  Eigen::MatrixXd x = unit_points;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    bool moved = false;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double& v = x(i, j);
      if (std::isnan(v)) throw DomainError("evaluate_sse: NaN coordinate in row " + std::to_string(i));
      if (v < 0.0 || v > 1.0) {
        v = std::clamp(v, 0.0, 1.0);
        moved = true;
      }
    }
    if (moved) ++out.clamped;
  }
  out.values = Eigen::VectorXd::Zero(x.rows());

  std::function<void(NodeId, const std::vector<Eigen::Index>&)> visit = [&](NodeId id,
                                                                            const std::vector<Eigen::Index>& rows) {
    if (rows.empty()) return;
    const auto& n = tree.node(id);
    if (n.expansion) {
      const Eigen::VectorXd v = n.expansion->evaluate(gather_rows(x, rows));
      for (std::size_t i = 0; i < rows.size(); ++i) out.values(rows[i]) += v(static_cast<Eigen::Index>(i));
    }
    if (n.terminal()) return;
    const auto j = static_cast<Eigen::Index>(*n.split_dim);
    const double mid = tree.node(n.children[0]).domain.upper[static_cast<std::size_t>(j)];
    std::vector<Eigen::Index> lo, hi;
    for (Eigen::Index r : rows) (x(r, j) < mid ? lo : hi).push_back(r);
    visit(n.children[0], lo);
    visit(n.children[1], hi);
  };
  std::vector<Eigen::Index> all(static_cast<std::size_t>(x.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  visit(0, all);
  return out;
}

SseEvaluation evaluate_sse(const SseTree& tree, const uncertainty::SampleMatrix& points) {
  if (points.space() == uncertainty::SampleSpace::Unit) return evaluate_sse(tree, points.points());
  if (!tree.random_vector()) throw StateError("evaluate_sse: physical points need the tree's random vector");
  return evaluate_sse(tree, uncertainty::to_unit(points, *tree.random_vector()).points());
}

double training_sse(const SseTree& tree) {
  double total = 0.0;
  for (NodeId id : tree.terminals()) {
    const auto& n = tree.node(id);
    if (n.rows.empty()) continue;
    Eigen::VectorXd r = n.residuals;
    if (n.expansion) r -= n.expansion->evaluate(gather_rows(tree.training_points(), n.rows));
    total += r.squaredNorm();
  }
  return total;
}

}  // namespace asse::sse
