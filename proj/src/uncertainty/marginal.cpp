#include "asse/uncertainty/marginal.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/uniform.hpp>
#include <boost/math/distributions/weibull.hpp>

#include "asse/errors.hpp"

namespace asse::uncertainty {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate(const MarginalDistribution::Params& params) {
  std::visit(Overloaded{
                 [](const Gaussian& g) {
                   if (!std::isfinite(g.mean) || !positive_finite(g.sd))
                     throw DomainError("gaussian: mean must be finite and sd > 0");
                 },
                 [](const Weibull& w) {
                   if (!positive_finite(w.scale) || !positive_finite(w.shape))
                     throw DomainError("weibull: scale and shape must be > 0");
                 },
                 [](const Beta& b) {
                   if (!positive_finite(b.a) || !positive_finite(b.b))
                     throw DomainError("beta: shapes a and b must be > 0");
                 },
                 [](const Uniform& u) {
                   if (!std::isfinite(u.lower) || !std::isfinite(u.upper) || !(u.lower < u.upper))
                     throw DomainError("uniform: requires finite lower < upper");
                 },
             },
             params);
}

// Each alternative maps to the matching boost distribution object.
auto boost_dist(const Gaussian& g) { return boost::math::normal_distribution<double>(g.mean, g.sd); }
auto boost_dist(const Weibull& w) { return boost::math::weibull_distribution<double>(w.shape, w.scale); }
auto boost_dist(const Beta& b) { return boost::math::beta_distribution<double>(b.a, b.b); }
auto boost_dist(const Uniform& u) { return boost::math::uniform_distribution<double>(u.lower, u.upper); }

struct Support {
  double lo;
  double hi;
};

Support support_of(const MarginalDistribution::Params& params) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(Overloaded{
                        [](const Gaussian&) { return Support{-inf, inf}; },
                        [](const Weibull&) { return Support{0.0, inf}; },
                        [](const Beta&) { return Support{0.0, 1.0}; },
                        [](const Uniform& u) { return Support{u.lower, u.upper}; },
                    },
                    params);
}

}  // namespace

MarginalDistribution::MarginalDistribution(Params params) : params_(params) { validate(params_); }

std::string MarginalDistribution::kind_name() const {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Weibull&) { return std::string("weibull"); },
                        [](const Beta&) { return std::string("beta"); },
                        [](const Uniform&) { return std::string("uniform"); },
                    },
                    params_);
}

double MarginalDistribution::pdf(double x) const {
  if (std::isnan(x)) throw DomainError("pdf: argument is NaN");
  const Support s = support_of(params_);
  if (x < s.lo || x > s.hi) return 0.0;
  return std::visit(
      [x](const auto& p) {
        try {
          return boost::math::pdf(boost_dist(p), x);
        } catch (const std::overflow_error&) {
          // Beta with a < 1 or b < 1 has an integrable singularity at the endpoint.
          return std::numeric_limits<double>::infinity();
        }
      },
      params_);
}

double MarginalDistribution::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf: argument is NaN");
  const Support s = support_of(params_);
  if (x <= s.lo) return 0.0;
  if (x >= s.hi) return 1.0;
  return std::visit([x](const auto& p) { return boost::math::cdf(boost_dist(p), x); }, params_);
}

double MarginalDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: probability outside [0,1]");
  const Support s = support_of(params_);
  if (p == 0.0) {
    if (!std::isfinite(s.lo)) throw DomainError("quantile(0) of a distribution unbounded below");
    return s.lo;
  }
  if (p == 1.0) {
    if (!std::isfinite(s.hi)) throw DomainError("quantile(1) of a distribution unbounded above");
    return s.hi;
  }
  return std::visit([p](const auto& d) { return boost::math::quantile(boost_dist(d), p); }, params_);
}

double MarginalDistribution::eval(double x, EvalMode mode) const {
  switch (mode) {
    case EvalMode::Pdf:
      return pdf(x);
    case EvalMode::Cdf:
      return cdf(x);
    case EvalMode::Quantile:
      if (!(x > 0.0 && x < 1.0) && !(x == 0.0 && bounded_below()) && !(x == 1.0 && bounded_above()))
        throw DomainError("quantile requires p in (0,1)");
      return quantile(x);
  }
  throw DomainError("unknown evaluation mode");
}

double MarginalDistribution::mean() const {
  return std::visit([](const auto& p) { return boost::math::mean(boost_dist(p)); }, params_);
}

double MarginalDistribution::variance() const {
  return std::visit([](const auto& p) { return boost::math::variance(boost_dist(p)); }, params_);
}

bool MarginalDistribution::bounded_below() const { return std::isfinite(support_of(params_).lo); }
bool MarginalDistribution::bounded_above() const { return std::isfinite(support_of(params_).hi); }

RandomVector::RandomVector(std::vector<MarginalDistribution> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw EmptyDataError("random vector needs at least one marginal");
}

double RandomVector::joint_pdf(const std::vector<double>& x) const {
  if (x.size() != marginals_.size()) throw ShapeError("joint_pdf: point dimension mismatch");
  double p = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) p *= marginals_[j].pdf(x[j]);
  return p;
}

}  // namespace asse::uncertainty
