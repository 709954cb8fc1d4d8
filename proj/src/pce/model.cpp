#include "asse/pce/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "asse/errors.hpp"
#include "asse/pce/regression.hpp"

namespace asse::pce {

Box Box::unit(std::size_t dimension) {
  return Box{std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0)};
}

double Box::volume() const noexcept {
  double v = 1.0;
  for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
  return v;
}

bool Box::contains(std::span<const double> point) const {
  if (point.size() != lower.size()) throw ShapeError("Box::contains: dimension mismatch");
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (point[j] < lower[j]) return false;
    if (upper[j] >= 1.0 ? point[j] > upper[j] : point[j] >= upper[j]) return false;
  }
  return true;
}

std::vector<orthopoly::PolynomialFamily> PceModel::families() const {
  std::vector<orthopoly::PolynomialFamily> fam;
  fam.reserve(domain.dimension());
  for (std::size_t j = 0; j < domain.dimension(); ++j)
    fam.push_back(orthopoly::PolynomialFamily::legendre(domain.lower[j], domain.upper[j]));
  return fam;
}

double PceModel::evaluate(std::span<const double> point) const {
  const auto fam = families();
  double v = 0.0;
  for (std::size_t l = 0; l < basis.size(); ++l)
    v += coefficients(static_cast<Eigen::Index>(l)) * orthopoly::eval_multivariate(basis[l], fam, point);
  return v;
}

Eigen::VectorXd PceModel::evaluate(const Eigen::MatrixXd& points) const {
  if (static_cast<std::size_t>(points.cols()) != dimension()) throw ShapeError("PceModel::evaluate: dimension mismatch");
  if (basis.empty()) return Eigen::VectorXd::Zero(points.rows());
  const auto fam = families();
  return orthopoly::design_matrix(basis, fam, points) * coefficients;
}

namespace {

double sample_variance(const Eigen::VectorXd& z) {
  if (z.size() < 2) return 0.0;
  return (z.array() - z.mean()).square().sum() / static_cast<double>(z.size() - 1);
}

}  // namespace

PceModel adaptive_fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& z, const Box& domain,
                      const FitOptions& options, AdaptiveFitReport* report) {
  if (points.rows() == 0 || z.size() == 0) throw EmptyDataError("adaptive_fit: no training points");
  if (points.rows() != z.size()) throw ShapeError("adaptive_fit: point count != response count");
  if (static_cast<std::size_t>(points.cols()) != domain.dimension())
    throw ShapeError("adaptive_fit: point dimension != domain dimension");
  if (options.orders.empty() || options.q_values.empty()) throw DomainError("adaptive_fit: empty (H, q) grid");

  std::vector<int> orders = options.orders;
  std::vector<double> qs = options.q_values;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

  const std::size_t m = domain.dimension();
  PceModel model;
  model.domain = domain;
  model.n_train = static_cast<std::size_t>(z.size());
  const auto fam = model.families();

  const MultiIndexSet all = hyperbolic_index_set(m, orders.back(), qs.back());
  const Eigen::MatrixXd psi_all = orthopoly::design_matrix(all.indices, fam, points);
  std::map<MultiIndex, Eigen::Index> column_of;
  for (std::size_t l = 0; l < all.size(); ++l) column_of.emplace(all.indices[l], static_cast<Eigen::Index>(l));

  struct Candidate {
    std::vector<MultiIndex> set;
    HybridLarResult fit;
  };
  std::map<std::vector<MultiIndex>, std::shared_ptr<const Candidate>> cache;

  const double tol = selection_tolerance(z);
  std::shared_ptr<const Candidate> best;
  double best_cloo = std::numeric_limits<double>::infinity();
  for (int order : orders) {
    for (double q : qs) {
      MultiIndexSet set = hyperbolic_index_set(m, order, q);
      auto it = cache.find(set.indices);
      if (it == cache.end()) {
        Eigen::MatrixXd x(points.rows(), static_cast<Eigen::Index>(set.size()));
        for (std::size_t l = 0; l < set.size(); ++l)
          x.col(static_cast<Eigen::Index>(l)) = psi_all.col(column_of.at(set.indices[l]));
        auto cand = std::make_shared<Candidate>(Candidate{set.indices, hybrid_lar_fit(x, z)});
        if (report)
          for (auto& w : cand->fit.warnings) report->warnings.push_back(w);
        it = cache.emplace(set.indices, std::move(cand)).first;
      }
      const auto& cand = it->second;
      if (report)
        report->cells.push_back({order, q, set.size(), cand->fit.error.e_loo, cand->fit.error.e_cloo});
      if (cand->fit.error.e_cloo < best_cloo - tol) {
        best_cloo = cand->fit.error.e_cloo;
        best = cand;
        model.order = order;
        model.q = q;
      }
    }
  }

  if (!best) {
    model.basis = {MultiIndex{std::vector<int>(m, 0)}};
    model.coefficients = Eigen::VectorXd::Constant(1, z.mean());
    model.e_loo = sample_variance(z);
    model.e_cloo = model.e_loo;
    model.order = 0;
    model.q = qs.front();
    model.fallback = true;
    if (report) report->warnings.push_back("all candidate fits degenerate; constant-mean fallback");
    return model;
  }

  for (Eigen::Index col : best->fit.active) model.basis.push_back(best->set[static_cast<std::size_t>(col)]);
  model.coefficients = best->fit.coefficients;
  model.e_loo = best->fit.error.e_loo;
  model.e_cloo = best->fit.error.e_cloo;
  return model;
}

Moments pce_moments(const PceModel& model) {
  Moments mom{0.0, 0.0};
  for (std::size_t l = 0; l < model.basis.size(); ++l) {
    const double c = model.coefficients(static_cast<Eigen::Index>(l));
    if (model.basis[l].is_zero())
      mom.mean += c;
    else
      mom.variance += c * c;
  }
  return mom;
}

SobolIndices sobol_first_order(const PceModel& model) {
  const std::size_t m = model.dimension();
  if (m == 0) throw ShapeError("sobol_first_order: model has no dimensions");
  SobolIndices out;
  out.first_order.assign(m, 0.0);
  double total = 0.0;
  for (std::size_t l = 0; l < model.basis.size(); ++l) {
    const auto& mi = model.basis[l];
    if (mi.is_zero()) continue;
    const double c2 = model.coefficients(static_cast<Eigen::Index>(l)) * model.coefficients(static_cast<Eigen::Index>(l));
    total += c2;
    if (mi.interaction_order() == 1)
      for (std::size_t j = 0; j < m; ++j)
        if (mi.degrees[j] != 0) out.first_order[j] += c2;
  }
  if (!(total > 0.0)) {
    out.first_order.assign(m, 1.0 / static_cast<double>(m));
    out.degenerate = true;
    return out;
  }
  for (double& s : out.first_order) s /= total;
  return out;
}

}  // namespace asse::pce
