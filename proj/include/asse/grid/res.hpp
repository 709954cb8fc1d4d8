#pragma once

#include <span>
#include <vector>

#include "asse/grid/case.hpp"

namespace asse::grid {

struct WindFarm {
  double cut_in = 3.0;   ///< m/s
  double rated = 12.0;   ///< m/s
  double cut_out = 25.0; ///< m/s
  double capacity = 100.0;  ///< MW
  int bus = 2;
};

struct PvPlant {
  double capacity = 100.0;  ///< MW at irradiance 1
  int bus = 3;
};

/// Renewable plants injected as negative PQ load.
struct ResModel {
  WindFarm wind;
  PvPlant pv;
  /// Take the conventional generators at the RES buses out of service instead
  /// of letting the plants supplement them.
  bool replace_generators = false;

  void validate() const;
};

struct ResOutput {
  double wind_mw = 0.0;
  double pv_mw = 0.0;
};

/// Cubic wind curve between cut-in and rated speed, flat up to cut-out; PV linear in irradiance.
ResOutput res_power(const ResModel& model, double wind_speed, double irradiance);

/// Where the components of a physical sample go: (wind speed, irradiance, load_1, ..., load_k).
struct UncertaintyMapping {
  std::vector<int> load_buses{5, 7, 9};

  std::size_t dimension() const noexcept { return 2 + load_buses.size(); }
};

struct ApplyDiagnostics {
  std::size_t clamped_loads = 0;
};

/// Copy of `pcase` with the sample applied: RES outputs subtracted from Pd at
/// their buses (Q unchanged), load buses set to the sampled Pd with Qd scaled
/// to keep the nominal power factor. Negative loads are clamped to 0.
PowerSystemCase apply_uncertainty(const PowerSystemCase& pcase, const ResModel& res, const UncertaintyMapping& mapping,
                                  std::span<const double> zeta, ApplyDiagnostics* diag = nullptr);

}  // namespace asse::grid
