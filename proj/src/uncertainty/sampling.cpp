#include "asse/uncertainty/sampling.hpp"

#include <array>
#include <cmath>
#include <string>

#include "asse/errors.hpp"

namespace asse::uncertainty {

namespace {

// Joe & Kuo new-joe-kuo-6.21201, dimensions 2..32. Dimension 1 is van der Corput.
struct DirectionEntry {
  int degree;
  std::uint32_t coeffs;
  std::array<std::uint32_t, 8> m;
};

constexpr std::array<DirectionEntry, 31> kJoeKuo = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
}};

}  // namespace

SampleMatrix::SampleMatrix(Eigen::MatrixXd points, SampleSpace space) : points_(std::move(points)), space_(space) {
  if (space_ == SampleSpace::Unit) {
    for (Eigen::Index i = 0; i < points_.rows(); ++i)
      for (Eigen::Index j = 0; j < points_.cols(); ++j)
        if (!(points_(i, j) >= 0.0 && points_(i, j) < 1.0))
          throw DomainError("unit-space sample outside [0,1) at row " + std::to_string(i));
  }
}

SampleMatrix SampleMatrix::head_rows(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 0 || first + count > points_.rows()) throw ShapeError("head_rows: range out of bounds");
  return SampleMatrix(points_.middleRows(first, count), space_);
}

SobolSequence::SobolSequence(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw DomainError("sobol: dimension must be >= 1");
  if (dimension > kMaxDimension)
    throw UnsupportedError("sobol: dimension " + std::to_string(dimension) + " exceeds the " +
                           std::to_string(kMaxDimension) + " supported direction-number sets");
  directions_.resize(dimension);
  for (int k = 0; k < kBits; ++k) directions_[0][k] = std::uint32_t{1} << (kBits - 1 - k);
  for (std::size_t d = 1; d < dimension; ++d) {
    const DirectionEntry& e = kJoeKuo[d - 1];
    auto& v = directions_[d];
    const int s = e.degree;
    for (int k = 0; k < s && k < kBits; ++k) v[k] = e.m[k] << (kBits - 1 - k);
    for (int k = s; k < kBits; ++k) {
      std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
      for (int r = 1; r < s; ++r)
        if ((e.coeffs >> (s - 1 - r)) & 1u) value ^= v[k - r];
      v[k] = value;
    }
  }
}

std::vector<double> SobolSequence::point(std::uint64_t index) const {
  if (index >> kBits) throw UnsupportedError("sobol: index exceeds 2^32");
  const std::uint64_t gray = index ^ (index >> 1);
  std::vector<double> out(dimension_);
  constexpr double scale = 1.0 / 4294967296.0;
  for (std::size_t d = 0; d < dimension_; ++d) {
    std::uint32_t x = 0;
    for (int k = 0; k < kBits; ++k)
      if ((gray >> k) & 1u) x ^= directions_[d][k];
    out[d] = static_cast<double>(x) * scale;
  }
  return out;
}

SampleMatrix sample_qmc(std::size_t n, std::size_t dimension, std::uint64_t skip) {
  if (n == 0) throw EmptyDataError("sample_qmc: n must be >= 1");
  SobolSequence seq(dimension);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = seq.point(skip + i);
    for (std::size_t d = 0; d < dimension; ++d) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = p[d];
  }
  return SampleMatrix(std::move(pts), SampleSpace::Unit);
}

SampleMatrix to_physical(const SampleMatrix& unit, const RandomVector& rv) {
  if (unit.space() != SampleSpace::Unit) throw DomainError("to_physical: input is not in unit space");
  if (static_cast<std::size_t>(unit.cols()) != rv.dimension()) throw ShapeError("to_physical: column count != M");
  Eigen::MatrixXd out(unit.rows(), unit.cols());
  for (Eigen::Index j = 0; j < unit.cols(); ++j)
    for (Eigen::Index i = 0; i < unit.rows(); ++i) out(i, j) = rv[j].quantile(unit(i, j));
  return SampleMatrix(std::move(out), SampleSpace::Physical);
}

SampleMatrix to_unit(const SampleMatrix& physical, const RandomVector& rv) {
  if (physical.space() != SampleSpace::Physical) throw DomainError("to_unit: input is not in physical space");
  if (static_cast<std::size_t>(physical.cols()) != rv.dimension()) throw ShapeError("to_unit: column count != M");
  Eigen::MatrixXd out(physical.rows(), physical.cols());
  for (Eigen::Index j = 0; j < physical.cols(); ++j)
    for (Eigen::Index i = 0; i < physical.rows(); ++i) {
      // cdf can round to exactly 1 far in an upper tail; keep the half-open cube.
      const double u = rv[j].cdf(physical(i, j));
      out(i, j) = u < 1.0 ? u : std::nextafter(1.0, 0.0);
    }
  return SampleMatrix(std::move(out), SampleSpace::Unit);
}

}  // namespace asse::uncertainty
