#include "asse/grid/network.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/LU>

#include "asse/errors.hpp"

namespace asse::grid {

using cd = std::complex<double>;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<BusType> effective_types(const PowerSystemCase& pc) {
  std::vector<BusType> t(pc.buses.size());
  std::vector<bool> has_gen(pc.buses.size(), false);
  for (const auto& g : pc.generators)
    if (g.in_service) has_gen[pc.bus_index(g.bus)] = true;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = pc.buses[i].type;
    if (t[i] == BusType::PV && !has_gen[i]) t[i] = BusType::PQ;
  }
  return t;
}

VoltageState flat_start(const PowerSystemCase& pc, const std::vector<BusType>& types) {
  const auto nb = static_cast<Eigen::Index>(pc.buses.size());
  VoltageState v{Eigen::VectorXd::Ones(nb), Eigen::VectorXd::Zero(nb)};
  const auto s = pc.slack_index();
  v.va(static_cast<Eigen::Index>(s)) = pc.buses[s].va * kDeg;
  for (const auto& g : pc.generators) {
    if (!g.in_service) continue;
    const auto i = pc.bus_index(g.bus);
    if (types[i] != BusType::PQ) v.vm(static_cast<Eigen::Index>(i)) = g.vg;
  }
  return v;
}

}  // namespace

Admittance build_admittance(const PowerSystemCase& pc) {
  const auto nb = static_cast<Eigen::Index>(pc.buses.size());
  Admittance a;
  a.ybus = Eigen::MatrixXcd::Zero(nb, nb);
  std::vector<cd> yff, yft, ytf, ytt;
  for (std::size_t k = 0; k < pc.branches.size(); ++k) {
    const auto& br = pc.branches[k];
    if (!br.in_service) continue;
    const cd ys = 1.0 / cd(br.r, br.x);
    const double tap = br.ratio == 0.0 ? 1.0 : br.ratio;
    const cd t = std::polar(tap, br.angle * kDeg);
    const cd tt = ys + cd(0.0, br.b / 2.0);
    a.branch.push_back(k);
    a.from.push_back(pc.bus_index(br.from));
    a.to.push_back(pc.bus_index(br.to));
    yff.push_back(tt / (t * std::conj(t)));
    yft.push_back(-ys / std::conj(t));
    ytf.push_back(-ys / t);
    ytt.push_back(tt);
  }
  const auto nl = static_cast<Eigen::Index>(a.branch.size());
  a.yff = Eigen::Map<Eigen::VectorXcd>(yff.data(), nl);
  a.yft = Eigen::Map<Eigen::VectorXcd>(yft.data(), nl);
  a.ytf = Eigen::Map<Eigen::VectorXcd>(ytf.data(), nl);
  a.ytt = Eigen::Map<Eigen::VectorXcd>(ytt.data(), nl);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto f = static_cast<Eigen::Index>(a.from[static_cast<std::size_t>(l)]);
    const auto t = static_cast<Eigen::Index>(a.to[static_cast<std::size_t>(l)]);
    a.ybus(f, f) += a.yff(l);
    a.ybus(f, t) += a.yft(l);
    a.ybus(t, f) += a.ytf(l);
    a.ybus(t, t) += a.ytt(l);
  }
  for (Eigen::Index i = 0; i < nb; ++i) {
    const auto& b = pc.buses[static_cast<std::size_t>(i)];
    a.ybus(i, i) += cd(b.gs, b.bs) / pc.base_mva;
  }
  return a;
}

Eigen::VectorXcd bus_power(const Eigen::MatrixXcd& ybus, const Eigen::VectorXd& vm, const Eigen::VectorXd& va) {
  Eigen::VectorXcd v(vm.size());
  for (Eigen::Index i = 0; i < vm.size(); ++i) v(i) = std::polar(vm(i), va(i));
  return v.cwiseProduct((ybus * v).conjugate());
}

Injections scheduled_injections(const PowerSystemCase& pc) {
  const auto nb = static_cast<Eigen::Index>(pc.buses.size());
  Injections inj{Eigen::VectorXd::Zero(nb), Eigen::VectorXd::Zero(nb)};
  for (Eigen::Index i = 0; i < nb; ++i) {
    inj.p(i) = -pc.buses[static_cast<std::size_t>(i)].pd / pc.base_mva;
    inj.q(i) = -pc.buses[static_cast<std::size_t>(i)].qd / pc.base_mva;
  }
  for (const auto& g : pc.generators) {
    if (!g.in_service) continue;
    const auto i = static_cast<Eigen::Index>(pc.bus_index(g.bus));
    inj.p(i) += g.pg / pc.base_mva;
    inj.q(i) += g.qg / pc.base_mva;
  }
  return inj;
}

double power_flow_mismatch(const PowerSystemCase& pc, const Injections& inj, const VoltageState& v) {
  const auto types = effective_types(pc);
  const Eigen::VectorXcd s = bus_power(build_admittance(pc).ybus, v.vm, v.va);
  double worst = 0.0;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (types[i] == BusType::Slack) continue;
    worst = std::max(worst, std::abs(s(k).real() - inj.p(k)));
    if (types[i] == BusType::PQ) worst = std::max(worst, std::abs(s(k).imag() - inj.q(k)));
  }
  return worst;
}

PowerFlowResult newton_power_flow(const PowerSystemCase& pc, const Injections& inj,
                                  const std::optional<VoltageState>& warm, const PowerFlowOptions& opt) {
  const auto nb = static_cast<Eigen::Index>(pc.buses.size());
  if (inj.p.size() != nb || inj.q.size() != nb) throw ShapeError("newton_power_flow: injection size != bus count");
  const auto types = effective_types(pc);
  std::vector<Eigen::Index> pvpq, pq;
  for (Eigen::Index i = 0; i < nb; ++i) {
    const auto t = types[static_cast<std::size_t>(i)];
    if (t != BusType::Slack) pvpq.push_back(i);
    if (t == BusType::PQ) pq.push_back(i);
  }
  const auto npvpq = static_cast<Eigen::Index>(pvpq.size());
  const auto npq = static_cast<Eigen::Index>(pq.size());
  const Eigen::MatrixXcd ybus = build_admittance(pc).ybus;

  PowerFlowResult res;
  res.voltage = flat_start(pc, types);
  if (warm) {
    if (warm->vm.size() != nb || warm->va.size() != nb) throw ShapeError("newton_power_flow: warm start size mismatch");
    res.voltage.va = warm->va;
    for (Eigen::Index i : pq) res.voltage.vm(i) = warm->vm(i);
  }
  auto& vm = res.voltage.vm;
  auto& va = res.voltage.va;

  auto mismatch = [&](Eigen::VectorXd& f) {
    const Eigen::VectorXcd s = bus_power(ybus, vm, va);
    f.resize(npvpq + npq);
    for (Eigen::Index k = 0; k < npvpq; ++k) f(k) = s(pvpq[static_cast<std::size_t>(k)]).real() - inj.p(pvpq[static_cast<std::size_t>(k)]);
    for (Eigen::Index k = 0; k < npq; ++k) f(npvpq + k) = s(pq[static_cast<std::size_t>(k)]).imag() - inj.q(pq[static_cast<std::size_t>(k)]);
    return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  };

  Eigen::VectorXd f;
  res.mismatch = mismatch(f);
  int growth = 0;
  while (res.mismatch >= opt.tolerance) {
    if (res.iterations >= opt.max_iterations) {
      res.message = "iteration limit reached";
      return res;
    }
    Eigen::VectorXcd v(nb);
    for (Eigen::Index i = 0; i < nb; ++i) v(i) = std::polar(vm(i), va(i));
    const Eigen::VectorXcd ibus = ybus * v;
    const Eigen::VectorXcd vnorm = v.array() / v.cwiseAbs().cast<cd>().array();
    const Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (ybus * vnorm.asDiagonal()).conjugate() +
                                    Eigen::MatrixXcd(ibus.conjugate().asDiagonal()) * vnorm.asDiagonal();
    const Eigen::MatrixXcd ds_dva =
        cd(0.0, 1.0) * v.asDiagonal() * (Eigen::MatrixXcd(ibus.asDiagonal()) - ybus * v.asDiagonal()).conjugate();

    Eigen::MatrixXd jac(npvpq + npq, npvpq + npq);
    for (Eigen::Index r = 0; r < npvpq; ++r) {
      const auto i = pvpq[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < npvpq; ++c) jac(r, c) = ds_dva(i, pvpq[static_cast<std::size_t>(c)]).real();
      for (Eigen::Index c = 0; c < npq; ++c) jac(r, npvpq + c) = ds_dvm(i, pq[static_cast<std::size_t>(c)]).real();
    }
    for (Eigen::Index r = 0; r < npq; ++r) {
      const auto i = pq[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < npvpq; ++c) jac(npvpq + r, c) = ds_dva(i, pvpq[static_cast<std::size_t>(c)]).imag();
      for (Eigen::Index c = 0; c < npq; ++c) jac(npvpq + r, npvpq + c) = ds_dvm(i, pq[static_cast<std::size_t>(c)]).imag();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) {
      res.message = "singular Jacobian";
      return res;
    }
    const Eigen::VectorXd dx = lu.solve(-f);
    for (Eigen::Index k = 0; k < npvpq; ++k) va(pvpq[static_cast<std::size_t>(k)]) += dx(k);
    for (Eigen::Index k = 0; k < npq; ++k) vm(pq[static_cast<std::size_t>(k)]) += dx(npvpq + k);
    ++res.iterations;

    const double previous = res.mismatch;
    res.mismatch = mismatch(f);
    if (!std::isfinite(res.mismatch)) {
      res.message = "non-finite mismatch";
      return res;
    }
    growth = res.mismatch > previous ? growth + 1 : 0;
    if (growth >= opt.divergence_window) {
      res.message = "diverging";
      return res;
    }
  }
  res.converged = true;
  return res;
}

}  // namespace asse::grid
