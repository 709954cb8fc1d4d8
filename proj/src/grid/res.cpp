#include "asse/grid/res.hpp"

#include <cmath>

#include "asse/errors.hpp"

namespace asse::grid {

void ResModel::validate() const {
  if (!(wind.cut_in >= 0.0 && wind.cut_in < wind.rated && wind.rated < wind.cut_out))
    throw DomainError("wind curve needs 0 <= cut_in < rated < cut_out");
  if (!(wind.capacity > 0.0) || !(pv.capacity > 0.0)) throw DomainError("RES capacities must be positive");
}

ResOutput res_power(const ResModel& m, double v, double irradiance) {
  if (!(v >= 0.0)) throw DomainError("wind speed must be non-negative");
  if (!(irradiance >= 0.0 && irradiance <= 1.0)) throw DomainError("irradiance must lie in [0, 1]");
  ResOutput out;
  const auto& w = m.wind;
  if (v >= w.cut_in && v < w.rated) {
    const double ci3 = w.cut_in * w.cut_in * w.cut_in;
    out.wind_mw = w.capacity * (v * v * v - ci3) / (w.rated * w.rated * w.rated - ci3);
  } else if (v >= w.rated && v <= w.cut_out) {
    out.wind_mw = w.capacity;
  }
  out.pv_mw = m.pv.capacity * irradiance;
  return out;
}

PowerSystemCase apply_uncertainty(const PowerSystemCase& pcase, const ResModel& res, const UncertaintyMapping& mapping,
                                  std::span<const double> zeta, ApplyDiagnostics* diag) {
  if (zeta.size() != mapping.dimension())
    throw ShapeError("apply_uncertainty: sample has " + std::to_string(zeta.size()) + " entries, mapping expects " +
                     std::to_string(mapping.dimension()));
  PowerSystemCase out = pcase;
  const auto power = res_power(res, zeta[0], zeta[1]);
  out.buses[out.bus_index(res.wind.bus)].pd -= power.wind_mw;
  out.buses[out.bus_index(res.pv.bus)].pd -= power.pv_mw;
  if (res.replace_generators)
    for (auto& g : out.generators)
      if (g.bus == res.wind.bus || g.bus == res.pv.bus) g.in_service = false;

  for (std::size_t k = 0; k < mapping.load_buses.size(); ++k) {
    auto& bus = out.buses[out.bus_index(mapping.load_buses[k])];
    const auto& nominal = pcase.buses[pcase.bus_index(mapping.load_buses[k])];
    double pd = zeta[2 + k];
    if (!std::isfinite(pd)) throw DomainError("apply_uncertainty: non-finite load sample");
    if (pd < 0.0) {
      pd = 0.0;
      if (diag) ++diag->clamped_loads;
    }
    bus.pd += pd - nominal.pd;
    if (nominal.pd != 0.0) bus.qd += nominal.qd * (pd / nominal.pd - 1.0);
  }
  return out;
}

}  // namespace asse::grid
