#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "asse/grid/case.hpp"
#include "asse/grid/network.hpp"

namespace asse::grid {

enum class OpfStatus { Converged, InfeasibleOrMaxIter };

struct OpfSolution {
  std::vector<double> pg;  ///< MW per case generator, 0 when out of service
  std::vector<double> qg;  ///< MVAr
  VoltageState voltage;
  double objective = 0.0;  ///< $/h
  OpfStatus status = OpfStatus::InfeasibleOrMaxIter;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::string message;

  bool converged() const noexcept { return status == OpfStatus::Converged; }
};

struct OpfOptions {
  double feasibility_tol = 1e-10;
  double gradient_tol = 1e-8;
  double complementarity_tol = 1e-8;
  double cost_tol = 1e-10;
  int max_iterations = 200;
  double sigma = 0.1;     ///< centering parameter
  double xi = 0.99995;    ///< fraction to the boundary
  double z0 = 1.0;        ///< initial slack floor
  std::optional<VoltageState> warm_start;
};

/// Minimizes total quadratic generation cost subject to the polar AC power
/// balance, bus voltage limits, branch apparent-power limits (both ends),
/// branch angle-difference limits and generator P/Q limits.
OpfSolution solve_ac_opf(const PowerSystemCase& pcase, const OpfOptions& options = {});

/// Independent re-evaluation of an OPF point, all in p.u.
struct OpfCheck {
  double mismatch = 0.0;   ///< largest bus P/Q imbalance
  double violation = 0.0;  ///< largest violation of any inequality (0 when feasible)
};

OpfCheck check_opf_solution(const PowerSystemCase& pcase, const OpfSolution& sol);

}  // namespace asse::grid
