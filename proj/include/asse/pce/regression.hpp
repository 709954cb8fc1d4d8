#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace asse::pce {

/// Ordinary least squares on a subset of columns, solved by column-pivoted QR.
/// Columns beyond the numerical rank (tolerance 1e-12 relative to the largest
/// pivot) are dropped and the fit is repeated on the remaining columns.
struct OlsFit {
  std::vector<Eigen::Index> columns;  ///< kept columns of the input matrix, ascending
  std::vector<Eigen::Index> dropped;
  Eigen::VectorXd coefficients;       ///< aligned with `columns`
};

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& z);

struct LooError {
  double e_loo = 0.0;         ///< mean squared leave-one-out residual
  double e_cloo = 0.0;        ///< small-sample corrected version used for model selection
  bool interpolating = false; ///< some leverage equals one; both errors are +inf
};

/// Leave-one-out error of an OLS fit using h_m = diag(X (X^T X)^-1 X^T):
/// loo residual_m = (z_m - x_m c) / (1 - h_m). No refits are performed.
LooError loo_error(const Eigen::MatrixXd& x_active, const Eigen::VectorXd& z, const Eigen::VectorXd& coefficients);

/// e_loo * n / (n - p) * (1 + trace((X^T X)^-1)); +inf when n <= p.
double corrected_loo(double e_loo, Eigen::Index n, Eigen::Index p, double trace_inv_gram);

/// Activation order of least angle regression.
///
/// Column 0 of `x` must be the constant basis; it is handled by centering and
/// never appears in `order`. Columns that vanish after centering or are
/// numerically collinear with the active set are skipped and reported.
struct LarPath {
  std::vector<Eigen::Index> order;
  std::vector<std::string> warnings;
};

LarPath lar_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, std::size_t max_steps);

struct HybridLarResult {
  std::vector<Eigen::Index> active;  ///< selected columns of X, ascending, always contains 0
  Eigen::VectorXd coefficients;      ///< OLS coefficients aligned with `active`
  LooError error;
  std::vector<double> candidate_cloo;  ///< corrected LOO of each nested candidate, prefix length 0..k
  std::vector<std::string> warnings;
};

/// LAR ranks the candidate columns; each nested prefix of the activation
/// order is refitted by OLS and the prefix with the smallest corrected LOO
/// error wins. Later prefixes must beat the incumbent by more than a
/// round-off floor, so ties resolve to the smaller model.
HybridLarResult hybrid_lar_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& z);

/// Round-off floor used for tie resolution during model selection.
double selection_tolerance(const Eigen::VectorXd& z);

}  // namespace asse::pce
