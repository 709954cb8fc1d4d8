#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "asse/uncertainty/marginal.hpp"

namespace asse::uncertainty {

enum class SampleSpace { Unit, Physical };

/// n x M block of input realizations, tagged with the space it lives in.
class SampleMatrix {
 public:
  SampleMatrix(Eigen::MatrixXd points, SampleSpace space);

  const Eigen::MatrixXd& points() const noexcept { return points_; }
  SampleSpace space() const noexcept { return space_; }
  Eigen::Index rows() const noexcept { return points_.rows(); }
  Eigen::Index cols() const noexcept { return points_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return points_(i, j); }

  /// Rows [first, first + count).
  SampleMatrix head_rows(Eigen::Index first, Eigen::Index count) const;

 private:
  Eigen::MatrixXd points_;
  SampleSpace space_;
};

/// Unscrambled Sobol' sequence with Joe-Kuo direction numbers, Gray-code order.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDimension = 32;
  static constexpr int kBits = 32;

  explicit SobolSequence(std::size_t dimension);

  std::size_t dimension() const noexcept { return dimension_; }
  /// Point with sequence index `index` (index 0 is the origin).
  std::vector<double> point(std::uint64_t index) const;

 private:
  std::size_t dimension_;
  std::vector<std::array<std::uint32_t, kBits>> directions_;
};

/// n points of the M-dimensional Sobol' sequence starting at sequence index `skip`.
SampleMatrix sample_qmc(std::size_t n, std::size_t dimension, std::uint64_t skip);

/// Column-wise quantile transform from the unit hypercube.
SampleMatrix to_physical(const SampleMatrix& unit, const RandomVector& rv);
/// Column-wise cdf transform into the unit hypercube.
SampleMatrix to_unit(const SampleMatrix& physical, const RandomVector& rv);

}  // namespace asse::uncertainty
