#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "asse/grid/case.hpp"

namespace asse::grid {

/// Bus admittance matrix and branch end admittances (p.u.) over in-service branches.
struct Admittance {
  Eigen::MatrixXcd ybus;
  std::vector<std::size_t> branch;  ///< case branch index of each row below
  std::vector<std::size_t> from;    ///< bus positions
  std::vector<std::size_t> to;
  Eigen::VectorXcd yff, yft, ytf, ytt;
};

Admittance build_admittance(const PowerSystemCase& pcase);

/// Complex power injected into the network at every bus, S = V conj(Ybus V).
Eigen::VectorXcd bus_power(const Eigen::MatrixXcd& ybus, const Eigen::VectorXd& vm, const Eigen::VectorXd& va);

/// Net specified injection per bus in p.u.: in-service generation minus demand.
struct Injections {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};

Injections scheduled_injections(const PowerSystemCase& pcase);

struct PowerFlowOptions {
  double tolerance = 1e-10;  ///< infinity norm of the P/Q mismatch, p.u.
  int max_iterations = 50;
  int divergence_window = 5;
};

struct VoltageState {
  Eigen::VectorXd vm;
  Eigen::VectorXd va;  ///< rad
};

struct PowerFlowResult {
  VoltageState voltage;
  bool converged = false;
  int iterations = 0;
  double mismatch = 0.0;
  std::string message;
};

/// Newton-Raphson on the polar mismatch equations. Slack and PV buses hold the
/// voltage magnitude of their generators; P at PV buses and P, Q at PQ buses
/// are taken from `inj`. Without a warm start the iteration begins flat.
PowerFlowResult newton_power_flow(const PowerSystemCase& pcase, const Injections& inj,
                                  const std::optional<VoltageState>& warm = std::nullopt,
                                  const PowerFlowOptions& options = {});

/// Largest |P| or |Q| imbalance over buses whose injection is specified.
double power_flow_mismatch(const PowerSystemCase& pcase, const Injections& inj, const VoltageState& v);

}  // namespace asse::grid
