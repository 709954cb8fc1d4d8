#pragma once

#include <string>
#include <variant>
#include <vector>

namespace asse::uncertainty {

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
};

/// Two-parameter Weibull, cdf 1 - exp(-(x/scale)^shape).
struct Weibull {
  double scale = 1.0;
  double shape = 1.0;
};

/// Beta(a, b) on [0, 1].
struct Beta {
  double a = 1.0;
  double b = 1.0;
};

struct Uniform {
  double lower = 0.0;
  double upper = 1.0;
};

enum class EvalMode { Pdf, Cdf, Quantile };

/// One independent input marginal. Parameters are validated on construction.
class MarginalDistribution {
 public:
  using Params = std::variant<Gaussian, Weibull, Beta, Uniform>;

  MarginalDistribution(Params params);  // NOLINT(google-explicit-constructor)
  MarginalDistribution(Gaussian p) : MarginalDistribution(Params{p}) {}  // NOLINT
  MarginalDistribution(Weibull p) : MarginalDistribution(Params{p}) {}   // NOLINT
  MarginalDistribution(Beta p) : MarginalDistribution(Params{p}) {}      // NOLINT
  MarginalDistribution(Uniform p) : MarginalDistribution(Params{p}) {}   // NOLINT

  const Params& params() const noexcept { return params_; }
  std::string kind_name() const;

  double pdf(double x) const;
  double cdf(double x) const;
  /// Inverse cdf on (0,1). Bounded supports also accept the endpoints 0 and 1.
  double quantile(double p) const;

  double eval(double x, EvalMode mode) const;

  double mean() const;
  double variance() const;
  bool bounded_below() const;
  bool bounded_above() const;

 private:
  Params params_;
};

/// Ordered list of mutually independent marginals.
class RandomVector {
 public:
  explicit RandomVector(std::vector<MarginalDistribution> marginals);

  std::size_t dimension() const noexcept { return marginals_.size(); }
  const MarginalDistribution& operator[](std::size_t j) const { return marginals_[j]; }
  const std::vector<MarginalDistribution>& marginals() const noexcept { return marginals_; }

  /// Product of marginal densities.
  double joint_pdf(const std::vector<double>& x) const;

 private:
  std::vector<MarginalDistribution> marginals_;
};

}  // namespace asse::uncertainty
