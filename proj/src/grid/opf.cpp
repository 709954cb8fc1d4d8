#include "asse/grid/opf.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "asse/errors.hpp"

namespace asse::grid {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Sum of V_a V_b (ca cos(th_a - th_b) + cb sin(th_a - th_b)); a == b gives ca V_a^2.
// Angles occupy variables [0, nb), magnitudes [nb, 2 nb).
class TrigForm {
 public:
  explicit TrigForm(Eigen::Index nb) : nb_(nb) {}

  void add(Eigen::Index a, Eigen::Index b, double ca, double cb) {
    if (ca != 0.0 || cb != 0.0) terms_.push_back({a, b, ca, cb});
  }

  double value(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& t : terms_) {
      if (t.a == t.b) {
        v += t.ca * x(nb_ + t.a) * x(nb_ + t.a);
        continue;
      }
      const double d = x(t.a) - x(t.b);
      v += x(nb_ + t.a) * x(nb_ + t.b) * (t.ca * std::cos(d) + t.cb * std::sin(d));
    }
    return v;
  }

  template <class Row>
  void add_gradient(const Eigen::VectorXd& x, double w, Row&& g) const {
    for (const auto& t : terms_) {
      const double va = x(nb_ + t.a);
      if (t.a == t.b) {
        g(nb_ + t.a) += w * 2.0 * t.ca * va;
        continue;
      }
      const double vb = x(nb_ + t.b);
      const double d = x(t.a) - x(t.b);
      const double c = t.ca * std::cos(d) + t.cb * std::sin(d);
      const double s = -t.ca * std::sin(d) + t.cb * std::cos(d);
      g(t.a) += w * va * vb * s;
      g(t.b) -= w * va * vb * s;
      g(nb_ + t.a) += w * vb * c;
      g(nb_ + t.b) += w * va * c;
    }
  }

  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const {
    if (w == 0.0) return;
    for (const auto& t : terms_) {
      const Eigen::Index ia = nb_ + t.a;
      if (t.a == t.b) {
        h(ia, ia) += w * 2.0 * t.ca;
        continue;
      }
      const Eigen::Index ib = nb_ + t.b;
      const double va = x(ia), vb = x(ib);
      const double d = x(t.a) - x(t.b);
      const double c = t.ca * std::cos(d) + t.cb * std::sin(d);
      const double s = -t.ca * std::sin(d) + t.cb * std::cos(d);
      const double vv = w * va * vb * c;
      h(t.a, t.a) -= vv;
      h(t.b, t.b) -= vv;
      h(t.a, t.b) += vv;
      h(t.b, t.a) += vv;
      auto sym = [&](Eigen::Index i, Eigen::Index j, double v) {
        h(i, j) += v;
        h(j, i) += v;
      };
      sym(t.a, ia, w * vb * s);
      sym(t.a, ib, w * va * s);
      sym(t.b, ia, -w * vb * s);
      sym(t.b, ib, -w * va * s);
      sym(ia, ib, w * c);
    }
  }

 private:
  struct Term {
    Eigen::Index a, b;
    double ca, cb;
  };
  Eigen::Index nb_;
  std::vector<Term> terms_;
};

struct Linear {
  std::vector<std::pair<Eigen::Index, double>> coef;
  double rhs;  // sum coef x - rhs (<= 0 or == 0)
};

struct FlowLimit {
  TrigForm p, q;
  double rate2;
};

class Problem {
 public:
  explicit Problem(const PowerSystemCase& pc) : pc_(pc), adm_(build_admittance(pc)) {
    nb_ = static_cast<Eigen::Index>(pc.buses.size());
    for (std::size_t g = 0; g < pc.generators.size(); ++g)
      if (pc.generators[g].in_service) gens_.push_back(g);
    ng_ = static_cast<Eigen::Index>(gens_.size());
    n_ = 2 * nb_ + 2 * ng_;
    base_ = pc.base_mva;

    for (Eigen::Index i = 0; i < nb_; ++i) {
      p_.emplace_back(nb_);
      q_.emplace_back(nb_);
      for (Eigen::Index k = 0; k < nb_; ++k) {
        const auto y = adm_.ybus(i, k);
        if (y == 0.0) continue;
        p_.back().add(i, k, y.real(), y.imag());
        q_.back().add(i, k, -y.imag(), y.real());
      }
    }
    gen_at_.assign(static_cast<std::size_t>(nb_), {});
    for (Eigen::Index j = 0; j < ng_; ++j)
      gen_at_[pc.bus_index(pc.generators[gens_[static_cast<std::size_t>(j)]].bus)].push_back(j);

    const auto ref = static_cast<Eigen::Index>(pc.slack_index());
    eq_lin_.push_back({{{ref, 1.0}}, pc.buses[static_cast<std::size_t>(ref)].va * kDeg});

    for (std::size_t l = 0; l < adm_.branch.size(); ++l) {
      const auto& br = pc.branches[adm_.branch[l]];
      const auto f = static_cast<Eigen::Index>(adm_.from[l]);
      const auto t = static_cast<Eigen::Index>(adm_.to[l]);
      const auto li = static_cast<Eigen::Index>(l);
      if (br.rate_a > 0.0) {
        const double r2 = std::pow(br.rate_a / base_, 2);
        FlowLimit from{TrigForm(nb_), TrigForm(nb_), r2};
        from.p.add(f, f, adm_.yff(li).real(), 0.0);
        from.q.add(f, f, -adm_.yff(li).imag(), 0.0);
        from.p.add(f, t, adm_.yft(li).real(), adm_.yft(li).imag());
        from.q.add(f, t, -adm_.yft(li).imag(), adm_.yft(li).real());
        FlowLimit to{TrigForm(nb_), TrigForm(nb_), r2};
        to.p.add(t, t, adm_.ytt(li).real(), 0.0);
        to.q.add(t, t, -adm_.ytt(li).imag(), 0.0);
        to.p.add(t, f, adm_.ytf(li).real(), adm_.ytf(li).imag());
        to.q.add(t, f, -adm_.ytf(li).imag(), adm_.ytf(li).real());
        flows_.push_back(std::move(from));
        flows_.push_back(std::move(to));
      }
      if (br.angmax < 360.0) iq_lin_.push_back({{{f, 1.0}, {t, -1.0}}, br.angmax * kDeg});
      if (br.angmin > -360.0) iq_lin_.push_back({{{f, -1.0}, {t, 1.0}}, -br.angmin * kDeg});
    }

    auto bound = [&](Eigen::Index k, double lo, double hi) {
      if (lo == hi) {
        eq_lin_.push_back({{{k, 1.0}}, lo});
        return;
      }
      if (std::isfinite(hi)) iq_lin_.push_back({{{k, 1.0}}, hi});
      if (std::isfinite(lo)) iq_lin_.push_back({{{k, -1.0}}, -lo});
    };
    for (Eigen::Index i = 0; i < nb_; ++i)
      bound(nb_ + i, pc.buses[static_cast<std::size_t>(i)].vmin, pc.buses[static_cast<std::size_t>(i)].vmax);
    for (Eigen::Index j = 0; j < ng_; ++j) {
      const auto& g = pc.generators[gens_[static_cast<std::size_t>(j)]];
      bound(pg(j), g.pmin / base_, g.pmax / base_);
      bound(qg(j), g.qmin / base_, g.qmax / base_);
    }
    neq_ = 2 * nb_ + static_cast<Eigen::Index>(eq_lin_.size());
    niq_ = static_cast<Eigen::Index>(flows_.size() + iq_lin_.size());
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index neq() const { return neq_; }
  Eigen::Index niq() const { return niq_; }
  Eigen::Index pg(Eigen::Index j) const { return 2 * nb_ + j; }
  Eigen::Index qg(Eigen::Index j) const { return 2 * nb_ + ng_ + j; }
  const std::vector<std::size_t>& gens() const { return gens_; }

  Eigen::VectorXd initial_point(const std::optional<VoltageState>& warm) const {
    Eigen::VectorXd x(n_);
    const double ref = pc_.buses[pc_.slack_index()].va * kDeg;
    auto mid = [](double lo, double hi) {
      lo = std::isfinite(lo) ? lo : -1e10;
      hi = std::isfinite(hi) ? hi : 1e10;
      return 0.5 * (lo + hi);
    };
    for (Eigen::Index i = 0; i < nb_; ++i) {
      const auto& b = pc_.buses[static_cast<std::size_t>(i)];
      x(i) = warm ? warm->va(i) : ref;
      x(nb_ + i) = warm ? warm->vm(i) : mid(b.vmin, b.vmax);
    }
    for (Eigen::Index j = 0; j < ng_; ++j) {
      const auto& g = pc_.generators[gens_[static_cast<std::size_t>(j)]];
      x(pg(j)) = mid(g.pmin, g.pmax) / base_;
      x(qg(j)) = mid(g.qmin, g.qmax) / base_;
    }
    return x;
  }

  double cost(const Eigen::VectorXd& x, Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr) const {
    double f = 0.0;
    for (Eigen::Index j = 0; j < ng_; ++j) {
      const auto& c = pc_.generators[gens_[static_cast<std::size_t>(j)]].cost;
      const double p = base_ * x(pg(j));
      f += (c[0] * p + c[1]) * p + c[2];
      if (grad) (*grad)(pg(j)) += base_ * (2.0 * c[0] * p + c[1]);
      if (hess) (*hess)(pg(j), pg(j)) += 2.0 * c[0] * base_ * base_;
    }
    return f;
  }

  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& dg, Eigen::VectorXd& h,
                   Eigen::MatrixXd& dh) const {
    g.resize(neq_);
    dg = Eigen::MatrixXd::Zero(neq_, n_);
    for (Eigen::Index i = 0; i < nb_; ++i) {
      const auto& b = pc_.buses[static_cast<std::size_t>(i)];
      g(i) = p_[static_cast<std::size_t>(i)].value(x) + b.pd / base_;
      g(nb_ + i) = q_[static_cast<std::size_t>(i)].value(x) + b.qd / base_;
      p_[static_cast<std::size_t>(i)].add_gradient(x, 1.0, dg.row(i));
      q_[static_cast<std::size_t>(i)].add_gradient(x, 1.0, dg.row(nb_ + i));
      for (Eigen::Index j : gen_at_[static_cast<std::size_t>(i)]) {
        g(i) -= x(pg(j));
        g(nb_ + i) -= x(qg(j));
        dg(i, pg(j)) = -1.0;
        dg(nb_ + i, qg(j)) = -1.0;
      }
    }
    for (std::size_t k = 0; k < eq_lin_.size(); ++k) {
      const auto r = 2 * nb_ + static_cast<Eigen::Index>(k);
      g(r) = linear(eq_lin_[k], x, dg.row(r));
    }

    h.resize(niq_);
    dh = Eigen::MatrixXd::Zero(niq_, n_);
    for (std::size_t k = 0; k < flows_.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      const auto& fl = flows_[k];
      const double p = fl.p.value(x), q = fl.q.value(x);
      h(r) = p * p + q * q - fl.rate2;
      fl.p.add_gradient(x, 2.0 * p, dh.row(r));
      fl.q.add_gradient(x, 2.0 * q, dh.row(r));
    }
    for (std::size_t k = 0; k < iq_lin_.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(flows_.size() + k);
      h(r) = linear(iq_lin_[k], x, dh.row(r));
    }
  }

  Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& lam,
                                     const Eigen::VectorXd& mu) const {
    Eigen::MatrixXd hxx = Eigen::MatrixXd::Zero(n_, n_);
    cost(x, nullptr, &hxx);
    for (Eigen::Index i = 0; i < nb_; ++i) {
      p_[static_cast<std::size_t>(i)].add_hessian(x, lam(i), hxx);
      q_[static_cast<std::size_t>(i)].add_hessian(x, lam(nb_ + i), hxx);
    }
    Eigen::VectorXd gp(n_), gq(n_);
    for (std::size_t k = 0; k < flows_.size(); ++k) {
      const double w = mu(static_cast<Eigen::Index>(k));
      if (w == 0.0) continue;
      const auto& fl = flows_[k];
      gp.setZero();
      gq.setZero();
      fl.p.add_gradient(x, 1.0, gp);
      fl.q.add_gradient(x, 1.0, gq);
      hxx.noalias() += 2.0 * w * (gp * gp.transpose() + gq * gq.transpose());
      fl.p.add_hessian(x, 2.0 * w * fl.p.value(x), hxx);
      fl.q.add_hessian(x, 2.0 * w * fl.q.value(x), hxx);
    }
    return hxx;
  }

  OpfSolution unpack(const Eigen::VectorXd& x) const {
    OpfSolution s;
    s.pg.assign(pc_.generators.size(), 0.0);
    s.qg.assign(pc_.generators.size(), 0.0);
    for (Eigen::Index j = 0; j < ng_; ++j) {
      s.pg[gens_[static_cast<std::size_t>(j)]] = base_ * x(pg(j));
      s.qg[gens_[static_cast<std::size_t>(j)]] = base_ * x(qg(j));
    }
    s.voltage.va = x.head(nb_);
    s.voltage.vm = x.segment(nb_, nb_);
    s.objective = pc_.total_cost(s.pg);
    return s;
  }

 private:
  template <class Row>
  static double linear(const Linear& l, const Eigen::VectorXd& x, Row&& row) {
    double v = -l.rhs;
    for (const auto& [k, c] : l.coef) {
      v += c * x(k);
      row(k) = c;
    }
    return v;
  }

  const PowerSystemCase& pc_;
  Admittance adm_;
  Eigen::Index nb_ = 0, ng_ = 0, n_ = 0, neq_ = 0, niq_ = 0;
  double base_ = 100.0;
  std::vector<std::size_t> gens_;
  std::vector<std::vector<Eigen::Index>> gen_at_;
  std::vector<TrigForm> p_, q_;
  std::vector<FlowLimit> flows_;
  std::vector<Linear> eq_lin_, iq_lin_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

OpfSolution solve_ac_opf(const PowerSystemCase& pc, const OpfOptions& opt) {
  pc.validate();
  const Problem prob(pc);
  const Eigen::Index n = prob.n(), neq = prob.neq(), niq = prob.niq();

  Eigen::VectorXd x = prob.initial_point(opt.warm_start);
  Eigen::VectorXd g, h, df(n);
  Eigen::MatrixXd dg, dh;
  auto evaluate = [&](double& f) {
    df.setZero();
    f = prob.cost(x, &df);
    prob.constraints(x, g, dg, h, dh);
  };

  double f = 0.0;
  evaluate(f);
  double gamma = 1.0;
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(neq);
  Eigen::VectorXd z = Eigen::VectorXd::Constant(niq, opt.z0);
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(niq, opt.z0);
  for (Eigen::Index k = 0; k < niq; ++k) {
    if (h(k) < -opt.z0) z(k) = -h(k);
    if (gamma / z(k) > opt.z0) mu(k) = gamma / z(k);
  }

  double f0 = f;
  Eigen::VectorXd lx = df + dg.transpose() * lam + dh.transpose() * mu;
  struct Conditions {
    double feas, grad, comp, cost;
  };
  auto conditions = [&]() {
    const double maxh = niq > 0 ? std::max(0.0, h.maxCoeff()) : 0.0;
    Conditions c;
    c.feas = std::max(inf_norm(g), maxh) / (1.0 + std::max(inf_norm(x), inf_norm(z)));
    c.grad = inf_norm(lx) / (1.0 + std::max(inf_norm(lam), inf_norm(mu)));
    c.comp = z.dot(mu) / (1.0 + inf_norm(x));
    c.cost = std::abs(f - f0) / (1.0 + std::abs(f0));
    return c;
  };

  Eigen::VectorXd best_x = x;
  double best_kkt = std::numeric_limits<double>::infinity();
  OpfSolution out;
  int it = 0;
  std::string message = "iteration limit reached";
  for (; it <= opt.max_iterations; ++it) {
    const auto c = conditions();
    const double kkt = std::max({c.feas, c.grad, c.comp});
    if (kkt < best_kkt) {
      best_kkt = kkt;
      best_x = x;
    }
    if (c.feas < opt.feasibility_tol && c.grad < opt.gradient_tol && c.comp < opt.complementarity_tol &&
        c.cost < opt.cost_tol && it > 0) {
      out = prob.unpack(x);
      out.status = OpfStatus::Converged;
      out.kkt_residual = kkt;
      out.iterations = it;
      out.message = "converged";
      return out;
    }
    if (it == opt.max_iterations) break;

    const Eigen::VectorXd zinv = z.cwiseInverse();
    const Eigen::MatrixXd dh_zinv = dh.transpose() * zinv.asDiagonal();
    const Eigen::MatrixXd lxx = prob.lagrangian_hessian(x, lam, mu);
    const Eigen::MatrixXd m = lxx + dh_zinv * mu.asDiagonal() * dh;
    const Eigen::VectorXd nvec = lx + dh_zinv * (mu.cwiseProduct(h) + gamma * Eigen::VectorXd::Ones(niq));

    Eigen::MatrixXd kkt_mat = Eigen::MatrixXd::Zero(n + neq, n + neq);
    kkt_mat.topLeftCorner(n, n) = m;
    kkt_mat.topRightCorner(n, neq) = dg.transpose();
    kkt_mat.bottomLeftCorner(neq, n) = dg;
    Eigen::VectorXd rhs(n + neq);
    rhs << -nvec, -g;
    const Eigen::VectorXd sol = kkt_mat.partialPivLu().solve(rhs);
    if (!sol.allFinite()) {
      message = "numerically failed: singular KKT system";
      break;
    }
    const Eigen::VectorXd dx = sol.head(n);
    const Eigen::VectorXd dlam = sol.tail(neq);
    const Eigen::VectorXd dz = -h - z - dh * dx;
    const Eigen::VectorXd dmu = -mu + zinv.cwiseProduct(gamma * Eigen::VectorXd::Ones(niq) - mu.cwiseProduct(dz));

    double alphap = 1.0, alphad = 1.0;
    for (Eigen::Index k = 0; k < niq; ++k) {
      if (dz(k) < 0.0) alphap = std::min(alphap, opt.xi * z(k) / -dz(k));
      if (dmu(k) < 0.0) alphad = std::min(alphad, opt.xi * mu(k) / -dmu(k));
    }
    x += alphap * dx;
    z += alphap * dz;
    lam += alphad * dlam;
    mu += alphad * dmu;
    if (niq > 0) gamma = opt.sigma * z.dot(mu) / static_cast<double>(niq);

    f0 = f;
    evaluate(f);
    lx = df + dg.transpose() * lam + dh.transpose() * mu;
    if (!x.allFinite() || !std::isfinite(f) || inf_norm(x) > 1e10) {
      message = "numerically failed: non-finite iterate";
      ++it;
      break;
    }
  }
  out = prob.unpack(best_x);
  out.status = OpfStatus::InfeasibleOrMaxIter;
  out.kkt_residual = best_kkt;
  out.iterations = it;
  out.message = message;
  return out;
}

OpfCheck check_opf_solution(const PowerSystemCase& pc, const OpfSolution& sol) {
  const auto nb = static_cast<Eigen::Index>(pc.buses.size());
  if (sol.voltage.vm.size() != nb || sol.pg.size() != pc.generators.size())
    throw ShapeError("check_opf_solution: solution does not match the case");
  const double base = pc.base_mva;
  const auto adm = build_admittance(pc);
  const Eigen::VectorXcd s = bus_power(adm.ybus, sol.voltage.vm, sol.voltage.va);

  Eigen::VectorXd p(nb), q(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    p(i) = -pc.buses[static_cast<std::size_t>(i)].pd / base;
    q(i) = -pc.buses[static_cast<std::size_t>(i)].qd / base;
  }
  OpfCheck c;
  auto violate = [&](double v) { c.violation = std::max(c.violation, v); };
  for (std::size_t g = 0; g < pc.generators.size(); ++g) {
    const auto& gen = pc.generators[g];
    if (!gen.in_service) continue;
    const auto i = static_cast<Eigen::Index>(pc.bus_index(gen.bus));
    p(i) += sol.pg[g] / base;
    q(i) += sol.qg[g] / base;
    violate((sol.pg[g] - gen.pmax) / base);
    violate((gen.pmin - sol.pg[g]) / base);
    if (std::isfinite(gen.qmax)) violate((sol.qg[g] - gen.qmax) / base);
    if (std::isfinite(gen.qmin)) violate((gen.qmin - sol.qg[g]) / base);
  }
  for (Eigen::Index i = 0; i < nb; ++i) {
    c.mismatch = std::max({c.mismatch, std::abs(s(i).real() - p(i)), std::abs(s(i).imag() - q(i))});
    const auto& b = pc.buses[static_cast<std::size_t>(i)];
    violate(sol.voltage.vm(i) - b.vmax);
    violate(b.vmin - sol.voltage.vm(i));
  }
  for (std::size_t l = 0; l < adm.branch.size(); ++l) {
    const auto& br = pc.branches[adm.branch[l]];
    const auto f = static_cast<Eigen::Index>(adm.from[l]);
    const auto t = static_cast<Eigen::Index>(adm.to[l]);
    const std::complex<double> vf = std::polar(sol.voltage.vm(f), sol.voltage.va(f));
    const std::complex<double> vt = std::polar(sol.voltage.vm(t), sol.voltage.va(t));
    const auto li = static_cast<Eigen::Index>(l);
    const auto sf = vf * std::conj(adm.yff(li) * vf + adm.yft(li) * vt);
    const auto st = vt * std::conj(adm.ytf(li) * vf + adm.ytt(li) * vt);
    if (br.rate_a > 0.0) {
      violate(std::abs(sf) - br.rate_a / base);
      violate(std::abs(st) - br.rate_a / base);
    }
    const double d = sol.voltage.va(f) - sol.voltage.va(t);
    if (br.angmax < 360.0) violate(d - br.angmax * kDeg);
    if (br.angmin > -360.0) violate(br.angmin * kDeg - d);
  }
  return c;
}

}  // namespace asse::grid
