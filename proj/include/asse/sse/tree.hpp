#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "asse/pce/model.hpp"
#include "asse/uncertainty/marginal.hpp"
#include "asse/uncertainty/sampling.hpp"

namespace asse::sse {

/// Box in the unit hypercube; its probability mass is its volume.
using Subdomain = pce::Box;

struct SseConfig {
  std::size_t n_ref_min = 10;
  int k_max = 1000;
  pce::FitOptions fit;
};

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct SseNode {
  int level = 0;
  int index = 1;  ///< d in alpha = (level, d), 1-based and sequential per level
  Subdomain domain;
  std::optional<pce::PceModel> expansion;
  double e_loo = 0.0;
  double score = 0.0;
  NodeId parent = kNoNode;
  std::array<NodeId, 2> children{kNoNode, kNoNode};
  std::optional<std::size_t> split_dim;

  /// Training rows falling in the domain and the residual response they carried
  /// into this node. Empty for trees loaded from a document.
  std::vector<Eigen::Index> rows;
  Eigen::VectorXd residuals;

  bool terminal() const noexcept { return children[0] == kNoNode; }
  double mass() const noexcept { return domain.volume(); }
};

/// Tree of residual expansions. Node 0 is the root and covers the whole cube.
class SseTree {
 public:
  SseTree(std::size_t dimension, SseConfig config, std::optional<uncertainty::RandomVector> rv = std::nullopt);

  std::size_t dimension() const noexcept { return dimension_; }
  const SseConfig& config() const noexcept { return config_; }
  const std::optional<uncertainty::RandomVector>& random_vector() const noexcept { return rv_; }

  const std::vector<SseNode>& nodes() const noexcept { return nodes_; }
  const SseNode& node(NodeId id) const { return nodes_.at(id); }
  SseNode& node(NodeId id) { return nodes_.at(id); }
  const SseNode& root() const { return nodes_.front(); }

  std::vector<NodeId> terminals() const;
  /// Terminal node whose domain holds `point` (which must lie in the closed cube).
  NodeId locate(std::span<const double> point) const;
  int depth() const;

  bool splittable(NodeId id) const;

  const Eigen::MatrixXd& training_points() const noexcept { return points_; }
  const Eigen::VectorXd& training_responses() const noexcept { return z_; }
  void set_training_data(Eigen::MatrixXd points, Eigen::VectorXd z);

  /// Appends a node, assigning the next free index on its level.
  NodeId add_node(SseNode node);

 private:
  std::size_t dimension_;
  SseConfig config_;
  std::optional<uncertainty::RandomVector> rv_;
  std::vector<SseNode> nodes_;
  std::vector<int> next_index_;
  Eigen::MatrixXd points_;
  Eigen::VectorXd z_;
};

/// z_raw minus the sum of every strict ancestor's expansion of `id` at `points`.
Eigen::VectorXd compute_residuals(const SseTree& tree, NodeId id, const Eigen::MatrixXd& points,
                                  const Eigen::VectorXd& z_raw);

/// e_loo * mass of a terminal node, taking e_loo from the parent when the node has no expansion.
double refinement_score(const SseTree& tree, NodeId id);

/// Splittable terminal node with the largest score; ties go to lower (level, index).
/// Empty when nothing can be split.
std::optional<NodeId> select_refinement_domain(const SseTree& tree);

/// Bisects a node at the midpoint of the dimension with the largest first-order
/// Sobol' index of its expansion and distributes its training rows.
std::pair<NodeId, NodeId> split_node(SseTree& tree, NodeId id);

/// Root-only tree: the root expansion is fitted to all of `z`.
SseTree init_asse(const uncertainty::SampleMatrix& points, const Eigen::VectorXd& z, const SseConfig& config = {},
                  std::optional<uncertainty::RandomVector> rv = std::nullopt);

/// One refinement iteration: select, split, fit the children that hold at
/// least N_ref_min points. Returns false once nothing is splittable.
bool refine_step(SseTree& tree);

/// init_asse followed by refine_step until exhaustion.
SseTree fit_asse(const uncertainty::SampleMatrix& points, const Eigen::VectorXd& z, const SseConfig& config = {},
                 std::optional<uncertainty::RandomVector> rv = std::nullopt);

struct SseEvaluation {
  Eigen::VectorXd values;
  std::size_t clamped = 0;  ///< points moved back into the cube before evaluation
};

/// Sum of the expansions on each point's root-to-terminal path. Coordinates
/// outside [0, 1] are clamped and counted.
SseEvaluation evaluate_sse(const SseTree& tree, const Eigen::MatrixXd& unit_points);
/// Physical samples go through the tree's random vector first.
SseEvaluation evaluate_sse(const SseTree& tree, const uncertainty::SampleMatrix& points);

/// Sum over terminal domains of squared training residuals left after the
/// terminal node's own expansion.
double training_sse(const SseTree& tree);

}  // namespace asse::sse
