#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "asse/orthopoly/polynomial.hpp"
#include "asse/pce/index_set.hpp"

namespace asse::pce {

/// Axis-aligned box in the unit hypercube.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unit(std::size_t dimension);
  std::size_t dimension() const noexcept { return lower.size(); }
  double volume() const noexcept;
  /// Half-open membership [lower, upper) per side, except that a side ending at 1 is closed.
  bool contains(std::span<const double> point) const;
  bool operator==(const Box&) const = default;
};

/// Sparse polynomial chaos expansion on a box, using orthonormal Legendre
/// polynomials on each box edge.
struct PceModel {
  std::vector<MultiIndex> basis;
  Eigen::VectorXd coefficients;
  Box domain;
  double e_loo = 0.0;   ///< plain leave-one-out error
  double e_cloo = 0.0;  ///< corrected leave-one-out error that drove selection
  std::size_t n_train = 0;
  int order = 0;        ///< H of the selected truncation
  double q = 1.0;       ///< q of the selected truncation
  bool fallback = false;

  std::size_t dimension() const noexcept { return domain.dimension(); }
  std::vector<orthopoly::PolynomialFamily> families() const;

  double evaluate(std::span<const double> point) const;
  /// Row-wise evaluation; every row must lie in the closed box.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;
};

/// Truncation grid swept by `adaptive_fit`.
struct FitOptions {
  std::vector<int> orders{0, 1, 2, 3, 4, 5, 6};
  std::vector<double> q_values{0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8};
};

/// Result of one (H, q) grid cell.
struct CellResult {
  int order;
  double q;
  std::size_t candidates;
  double e_loo;
  double e_cloo;
};

struct AdaptiveFitReport {
  std::vector<CellResult> cells;
  std::vector<std::string> warnings;
};

/// Sweeps the (H, q) grid in ascending order and runs hybrid LAR per cell.
/// The cell with the least corrected LOO error is kept; a later cell replaces
/// the incumbent only when it is smaller by more than `selection_tolerance`.
PceModel adaptive_fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& z, const Box& domain,
                      const FitOptions& options = {}, AdaptiveFitReport* report = nullptr);

struct Moments {
  double mean;
  double variance;
};

Moments pce_moments(const PceModel& model);

struct SobolIndices {
  std::vector<double> first_order;
  bool degenerate = false;  ///< zero variance; indices set to 1/M
};

SobolIndices sobol_first_order(const PceModel& model);

}  // namespace asse::pce
