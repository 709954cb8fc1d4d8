#include "asse/pce/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "asse/errors.hpp"

namespace asse::pce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTolerance = 1e-12;
constexpr double kUnitLeverage = 1e-10;
constexpr double kCollinear = 1e-10;

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  return out;
}

}  // namespace

double selection_tolerance(const Eigen::VectorXd& z) {
  if (z.size() == 0) return 0.0;
  return 1e-20 * z.squaredNorm() / static_cast<double>(z.size());
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& z) {
  if (x.rows() == 0) throw EmptyDataError("ols_fit: no observations");
  if (x.rows() != z.size()) throw ShapeError("ols_fit: design rows != response length");
  OlsFit fit;
  if (x.cols() == 0) return fit;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankTolerance);
  const Eigen::Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = 0; k < x.cols(); ++k) (k < rank ? fit.columns : fit.dropped).push_back(perm(k));
  std::sort(fit.columns.begin(), fit.columns.end());
  std::sort(fit.dropped.begin(), fit.dropped.end());

  if (fit.dropped.empty()) {
    fit.coefficients = qr.solve(z);
  } else {
    const Eigen::MatrixXd kept = select_columns(x, fit.columns);
    fit.coefficients = kept.colPivHouseholderQr().solve(z);
  }
  return fit;
}

double corrected_loo(double e_loo, Eigen::Index n, Eigen::Index p, double trace_inv_gram) {
  if (!std::isfinite(e_loo) || n <= p) return kInf;
  return e_loo * static_cast<double>(n) / static_cast<double>(n - p) * (1.0 + trace_inv_gram);
}

LooError loo_error(const Eigen::MatrixXd& x_active, const Eigen::VectorXd& z, const Eigen::VectorXd& coefficients) {
  const Eigen::Index n = x_active.rows();
  if (n == 0) throw EmptyDataError("loo_error: no observations");
  if (z.size() != n || coefficients.size() != x_active.cols()) throw ShapeError("loo_error: inconsistent sizes");

  const Eigen::VectorXd residual = z - x_active * coefficients;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x_active);
  qr.setThreshold(kRankTolerance);
  const Eigen::Index rank = qr.rank();

  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
  const Eigen::VectorXd leverage = q.rowwise().squaredNorm();

  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(rank, rank).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank, rank));
  const double trace_inv_gram = r_inv.squaredNorm();

  LooError out;
  double sum = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const double one_minus_h = 1.0 - leverage(m);
    if (one_minus_h <= kUnitLeverage) {
      out.interpolating = true;
      out.e_loo = kInf;
      out.e_cloo = kInf;
      return out;
    }
    const double e = residual(m) / one_minus_h;
    sum += e * e;
  }
  out.e_loo = sum / static_cast<double>(n);
  out.e_cloo = corrected_loo(out.e_loo, n, rank, trace_inv_gram);
  return out;
}

LarPath lar_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, std::size_t max_steps) {
  const Eigen::Index n = x.rows();
  if (n == 0) throw EmptyDataError("lar_path: no observations");
  if (z.size() != n) throw ShapeError("lar_path: design rows != response length");
  if (x.cols() == 0) throw ShapeError("lar_path: design has no columns");
  const double c0 = x(0, 0);
  if (c0 == 0.0 || (x.col(0).array() - c0).abs().maxCoeff() > 1e-12 * std::abs(c0))
    throw ShapeError("lar_path: column 0 must be the constant basis");

  LarPath path;

  // Centered, unit-norm candidate columns.
  std::vector<Eigen::Index> source;
  Eigen::MatrixXd xn(n, x.cols());
  Eigen::Index nc = 0;
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    Eigen::VectorXd col = x.col(j).array() - x.col(j).mean();
    const double norm = col.norm();
    if (norm <= kRankTolerance * std::max(x.col(j).norm(), std::numeric_limits<double>::min())) {
      path.warnings.push_back("column " + std::to_string(j) + " is constant or zero on the data; dropped");
      continue;
    }
    xn.col(nc++) = col / norm;
    source.push_back(j);
  }
  xn.conservativeResize(n, nc);

  const std::size_t limit =
      std::min<std::size_t>({max_steps, static_cast<std::size_t>(nc), static_cast<std::size_t>(n - 1)});
  if (limit == 0) return path;

  Eigen::VectorXd r = z.array() - z.mean();
  std::vector<char> state(static_cast<std::size_t>(nc), 0);  // 0 inactive, 1 active, 2 excluded
  std::vector<Eigen::Index> active;
  Eigen::MatrixXd chol(0, 0);  // lower Cholesky factor of the active Gram matrix

  auto try_activate = [&](Eigen::Index j) {
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd g(k);
    for (Eigen::Index a = 0; a < k; ++a) g(a) = xn.col(active[static_cast<std::size_t>(a)]).dot(xn.col(j));
    Eigen::VectorXd l = g;
    if (k > 0) chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(l);
    const double d2 = 1.0 - l.squaredNorm();
    if (d2 < kCollinear) {
      state[static_cast<std::size_t>(j)] = 2;
      path.warnings.push_back("column " + std::to_string(source[static_cast<std::size_t>(j)]) +
                              " is collinear with the active set; skipped");
      return;
    }
    chol.conservativeResize(k + 1, k + 1);
    chol.row(k).head(k) = l.transpose();
    chol.col(k).head(k).setZero();
    chol(k, k) = std::sqrt(d2);
    active.push_back(j);
    state[static_cast<std::size_t>(j)] = 1;
    path.order.push_back(source[static_cast<std::size_t>(j)]);
  };

  Eigen::VectorXd corr = xn.transpose() * r;
  double c_start = 0.0;
  while (active.empty()) {
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < nc; ++j)
      if (state[static_cast<std::size_t>(j)] == 0 && (best < 0 || std::abs(corr(j)) > std::abs(corr(best)))) best = j;
    if (best < 0) return path;
    c_start = std::abs(corr(best));
    if (c_start <= std::numeric_limits<double>::min()) return path;
    try_activate(best);
  }
  const double exhausted = 1e-10 * c_start;

  while (active.size() < limit) {
    corr = xn.transpose() * r;
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd sign(k);
    double big_c = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
      const double ca = corr(active[static_cast<std::size_t>(a)]);
      sign(a) = ca >= 0.0 ? 1.0 : -1.0;
      big_c = std::max(big_c, std::abs(ca));
    }
    if (big_c <= exhausted) break;

    // Equiangular direction: G v = s, A = (s^T v)^-1/2, u = X_A (A v).
    const auto lower = chol.topLeftCorner(k, k).triangularView<Eigen::Lower>();
    Eigen::VectorXd v = lower.solve(sign);
    v = lower.transpose().solve(v);
    const double norm_a = 1.0 / std::sqrt(sign.dot(v));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < k; ++a) u += norm_a * v(a) * xn.col(active[static_cast<std::size_t>(a)]);
    const Eigen::VectorXd a_vec = xn.transpose() * u;

    double gamma = kInf;
    Eigen::Index next = -1;
    for (Eigen::Index j = 0; j < nc; ++j) {
      if (state[static_cast<std::size_t>(j)] != 0) continue;
      for (const double cand : {(big_c - corr(j)) / (norm_a - a_vec(j)), (big_c + corr(j)) / (norm_a + a_vec(j))}) {
        if (cand > 1e-15 && cand < gamma) {
          gamma = cand;
          next = j;
        }
      }
    }
    if (next < 0) break;
    r -= gamma * u;
    if (big_c - gamma * norm_a <= exhausted) {
      // The step reaches the least-squares fit of the active set; the residual carries no
      // further correlation, so the path ends here.
      break;
    }
    try_activate(next);
  }
  return path;
}

HybridLarResult hybrid_lar_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& z) {
  const Eigen::Index n = x.rows();
  if (n == 0 || z.size() == 0) throw EmptyDataError("hybrid_lar_fit: no observations");
  if (z.size() != n) throw ShapeError("hybrid_lar_fit: design rows != response length");

  HybridLarResult result;
  const std::size_t max_steps = static_cast<std::size_t>(std::max<Eigen::Index>(0, std::min(x.cols() - 1, n - 1)));
  LarPath path = lar_path(x, z, max_steps);
  result.warnings = std::move(path.warnings);

  // Nested prefixes evaluated with an incrementally grown thin QR factorization.
  const Eigen::Index kmax = static_cast<Eigen::Index>(path.order.size()) + 1;
  Eigen::MatrixXd q(n, kmax);
  Eigen::MatrixXd r_inv = Eigen::MatrixXd::Zero(kmax, kmax);
  Eigen::VectorXd leverage = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd residual = z;
  Eigen::Index rank = 0;

  auto add_column = [&](const Eigen::VectorXd& col) -> bool {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(rank);
    Eigen::VectorXd w = col;
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = q.leftCols(rank).transpose() * w;
      w -= q.leftCols(rank) * c;
      coef += c;
    }
    const double rho = w.norm();
    if (rho <= kRankTolerance * col.norm()) return false;
    q.col(rank) = w / rho;
    // R^-1 of [[R, coef], [0, rho]] is [[R^-1, -R^-1 coef / rho], [0, 1 / rho]].
    r_inv.col(rank).head(rank) = -r_inv.topLeftCorner(rank, rank) * coef / rho;
    r_inv(rank, rank) = 1.0 / rho;
    leverage += q.col(rank).cwiseAbs2();
    residual -= q.col(rank) * q.col(rank).dot(z);
    ++rank;
    return true;
  };

  auto prefix_cloo = [&]() {
    double sum = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      const double one_minus_h = 1.0 - leverage(m);
      if (one_minus_h <= kUnitLeverage) return kInf;
      const double e = residual(m) / one_minus_h;
      sum += e * e;
    }
    const double e_loo = sum / static_cast<double>(n);
    return corrected_loo(e_loo, n, rank, r_inv.topLeftCorner(rank, rank).squaredNorm());
  };

  add_column(x.col(0));
  const double tol = selection_tolerance(z);
  std::size_t best_len = 0;
  double best = prefix_cloo();
  result.candidate_cloo.push_back(best);
  for (std::size_t k = 0; k < path.order.size(); ++k) {
    double cloo = kInf;
    if (add_column(x.col(path.order[k]))) {
      cloo = prefix_cloo();
    } else {
      result.warnings.push_back("column " + std::to_string(path.order[k]) + " is rank deficient in OLS refit");
    }
    result.candidate_cloo.push_back(cloo);
    if (cloo < best - tol) {
      best = cloo;
      best_len = k + 1;
    }
  }

  std::vector<Eigen::Index> chosen{0};
  chosen.insert(chosen.end(), path.order.begin(), path.order.begin() + static_cast<std::ptrdiff_t>(best_len));
  std::sort(chosen.begin(), chosen.end());
  const Eigen::MatrixXd xa = select_columns(x, chosen);
  OlsFit fit = ols_fit(xa, z);
  for (Eigen::Index c : fit.columns) result.active.push_back(chosen[static_cast<std::size_t>(c)]);
  for (Eigen::Index c : fit.dropped)
    result.warnings.push_back("column " + std::to_string(chosen[static_cast<std::size_t>(c)]) +
                              " dropped by rank-revealing QR");
  result.coefficients = std::move(fit.coefficients);
  result.error = loo_error(select_columns(x, result.active), z, result.coefficients);
  return result;
}

}  // namespace asse::pce
