#include "platoon/engine.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

#include "platoon/controller.hpp"
#include "platoon/eso.hpp"
#include "platoon/synthesis.hpp"

namespace platoon {
namespace {

constexpr std::size_t kLeaderDim = 3;
constexpr std::size_t kFollowerDim = 6;

std::size_t base(std::size_t j) { return kLeaderDim + kFollowerDim * j; }

const char* const kStateNames[] = {"p", "v", "a", "s", "beta1", "beta2"};

struct Local {
  SensorReading in;
  KinematicState self;
  FilterState fs;
  double s = 0.0;
};

Local read_local(const std::vector<double>& x, std::size_t j) {
  const std::size_t b = base(j);
  const std::size_t pb = j == 0 ? 0 : base(j - 1);
  Local l;
  l.self = {x[b], x[b + 1], x[b + 2]};
  l.s = x[b + 3];
  l.fs = {x[b + 4], x[b + 5]};
  l.in = {x[b + 1], x[b + 2], x[pb + 1], x[pb] - x[b]};
  return l;
}

}  // namespace

Simulator::Simulator(Scenario sc) : sc_(std::move(sc)) {
  sc_.validate();
  const std::size_t n = sc_.size();
  st_.t = 0.0;
  st_.x.assign(kLeaderDim + kFollowerDim * n, 0.0);
  st_.x[0] = sc_.leader_initial.p;
  st_.x[1] = sc_.leader_initial.v;
  st_.x[2] = sc_.leader_initial.a;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t b = base(j);
    const FollowerConfig& f = sc_.followers[j];
    st_.x[b] = f.initial.p;
    st_.x[b + 1] = f.initial.v;
    st_.x[b + 2] = f.initial.a;
    st_.x[b + 3] = f.s0;
    const FilterState fs = initial_filter_state(read_local(st_.x, j).in, f.spacing,
                                                sc_.gains.vehicles[j]);
    st_.x[b + 4] = fs.beta1;
    st_.x[b + 5] = fs.beta2;
  }
  st_.gamma.assign(n, 0.0);
  M_.assign(n, std::numeric_limits<double>::infinity());
  if (sc_.controller == ControllerKind::Dsc) {
    const VerificationReport rep = verify_all(sc_);
    for (std::size_t j = 0; j < n; ++j) {
      M_[j] = threshold_in_use(sc_.gains.vehicles[j], rep.vehicles[j]);
      if (!(M_[j] > 0.0) || !std::isfinite(M_[j])) {
        throw ConfigError("gains.trigger_threshold[" + std::to_string(j) +
                          "]: observer bound gives no positive threshold; set one explicitly");
      }
    }
    const std::vector<double> u = control_inputs(0.0, st_.x);
    for (std::size_t j = 0; j < n; ++j) {
      const EsoState es = initial_eso_state(u[j], sc_.followers[j].s0);
      st_.gamma[j] = es.gamma;
      events_.push_back({j, 0.0});
    }
  }
  const std::size_t dim = st_.x.size();
  k1_.resize(dim);
  k2_.resize(dim);
  k3_.resize(dim);
  k4_.resize(dim);
  tmp_.resize(dim);
}

void Simulator::check_finite(const std::vector<double>& x, double t) const {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::isfinite(x[k])) continue;
    std::string name;
    if (k < kLeaderDim) {
      name = std::string(kStateNames[k]) + "_0";
    } else {
      const std::size_t j = (k - kLeaderDim) / kFollowerDim;
      name = std::string(kStateNames[(k - kLeaderDim) % kFollowerDim]) + "_" +
             std::to_string(j + 1);
    }
    throw SimulationError("simulation diverged: non-finite " + name + " near t=" +
                          std::to_string(t));
  }
}

std::vector<double> Simulator::control_inputs(double, const std::vector<double>& x) const {
  const std::size_t n = sc_.size();
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Local l = read_local(x, j);
    const FollowerConfig& f = sc_.followers[j];
    if (sc_.controller == ControllerKind::Dsc) {
      const VehicleGains& g = sc_.gains.vehicles[j];
      u[j] = evaluate_surfaces(l.in, f.spacing, l.fs, l.s + g.l * l.self.a, g).u;
    } else {
      const double a_prev = j == 0 ? x[2] : x[base(j - 1) + 2];
      u[j] = baseline_u(l.in.gap - f.spacing, l.in.v_prev - l.in.v, a_prev, l.in.a, sc_.baseline);
    }
  }
  return u;
}

void Simulator::rhs(double t, const std::vector<double>& x, const std::vector<double>& gamma,
                    std::vector<double>& dx) const {
  check_finite(x, t);
  dx[0] = x[1];
  dx[1] = x[2];
  dx[2] = (-x[2] + sc_.profile.u0(t)) / sc_.leader.tau0;
  const std::vector<double> u = control_inputs(t, x);
  for (std::size_t j = 0; j < sc_.size(); ++j) {
    const std::size_t b = base(j);
    const FollowerConfig& f = sc_.followers[j];
    const Local l = read_local(x, j);
    const double sigma = disturbance(t, f.disturbance).sigma;
    if (!std::isfinite(u[j])) {
      throw SimulationError("simulation diverged: non-finite u_" + std::to_string(j + 1) +
                            " near t=" + std::to_string(t));
    }
    const KinematicRate kr = follower_deriv(l.self, u[j], sigma, f.params);
    dx[b] = kr.p_dot;
    dx[b + 1] = kr.v_dot;
    dx[b + 2] = kr.a_dot;
    if (sc_.controller == ControllerKind::Dsc) {
      const VehicleGains& g = sc_.gains.vehicles[j];
      const EsoState es{l.s, gamma[j], 0.0, 0};
      dx[b + 3] = eso_deriv(es, l.self.a, {g.l, g.b_hat, M_[j]});
      const SurfaceSnapshot s = evaluate_surfaces(l.in, f.spacing, l.fs, l.s + g.l * l.self.a, g);
      const FilterRate fr = filter_derivs(l.fs, s.alpha1, s.alpha2, g);
      dx[b + 4] = fr.beta1_dot;
      dx[b + 5] = fr.beta2_dot;
    } else {
      dx[b + 3] = dx[b + 4] = dx[b + 5] = 0.0;
    }
  }
}

void Simulator::rk4(double t, const std::vector<double>& x, double h,
                    std::vector<double>& out) const {
  const std::size_t dim = x.size();
  rhs(t, x, st_.gamma, k1_);
  for (std::size_t k = 0; k < dim; ++k) tmp_[k] = x[k] + 0.5 * h * k1_[k];
  rhs(t + 0.5 * h, tmp_, st_.gamma, k2_);
  for (std::size_t k = 0; k < dim; ++k) tmp_[k] = x[k] + 0.5 * h * k2_[k];
  rhs(t + 0.5 * h, tmp_, st_.gamma, k3_);
  for (std::size_t k = 0; k < dim; ++k) tmp_[k] = x[k] + h * k3_[k];
  rhs(t + h, tmp_, st_.gamma, k4_);
  out.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    out[k] = x[k] + h / 6.0 * (k1_[k] + 2.0 * k2_[k] + 2.0 * k3_[k] + k4_[k]);
  }
}

double Simulator::trigger_margin(double t, const std::vector<double>& x) const {
  const std::vector<double> u = control_inputs(t, x);
  double g = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < u.size(); ++j) {
    g = std::max(g, std::abs(st_.gamma[j] - u[j]) - M_[j]);
  }
  return g;
}

void Simulator::fire_due(double t) {
  const std::vector<double> u = control_inputs(t, st_.x);
  for (std::size_t j = 0; j < u.size(); ++j) {
    const VehicleGains& g = sc_.gains.vehicles[j];
    const EsoState es{st_.x[base(j) + 3], st_.gamma[j], 0.0, 0};
    const TriggerResult r = trigger_check(es, u[j], {g.l, g.b_hat, M_[j]}, t);
    if (r.fired) {
      st_.gamma[j] = r.state.gamma;
      events_.push_back({j, t});
    }
  }
}

void Simulator::step(double dt) { step_to(st_.t + dt); }

void Simulator::step_to(double t_end) {
  if (!(t_end > st_.t)) throw std::invalid_argument("step: end time must exceed current time");
  std::vector<double> out;
  if (sc_.controller == ControllerKind::Baseline ||
      sc_.trigger_location == TriggerLocation::Step) {
    rk4(st_.t, st_.x, t_end - st_.t, out);
    check_finite(out, t_end);
    st_.x.swap(out);
    st_.t = t_end;
    if (sc_.controller == ControllerKind::Dsc) fire_due(st_.t);
    return;
  }

  // Exact mode: integrate to the first crossing of |gamma - u| = M inside the
  // step, transmit there, and continue with the remainder.
  std::vector<double> probe;
  for (int guard = 0; guard < 10000000; ++guard) {
    const double t0 = st_.t;
    const double h = t_end - t0;
    rk4(t0, st_.x, h, out);
    check_finite(out, t_end);
    const double g_end = trigger_margin(t_end, out);
    if (g_end < 0.0) {
      st_.x.swap(out);
      st_.t = t_end;
      return;
    }
    const double g0 = trigger_margin(t0, st_.x);
    if (g0 >= 0.0) {
      fire_due(t0);
      continue;
    }
    auto G = [&](double theta) {
      if (theta <= 0.0) return g0;
      rk4(t0, st_.x, theta, probe);
      return trigger_margin(t0 + theta, probe);
    };
    std::uintmax_t max_iter = 100;
    const auto tol = [h](double a, double b) { return b - a <= 1e-13 * h; };
    const auto bracket =
        boost::math::tools::toms748_solve(G, 0.0, h, g0, g_end, tol, max_iter);
    const double theta = bracket.second;
    if (theta >= h) {
      st_.x.swap(out);
      st_.t = t_end;
      fire_due(st_.t);
      return;
    }
    rk4(t0, st_.x, theta, probe);
    st_.x.swap(probe);
    st_.t = t0 + theta;
    fire_due(st_.t);
  }
  throw SimulationError("trigger location did not terminate near t=" + std::to_string(st_.t));
}

std::vector<VehicleSignals> Simulator::signals() const {
  const std::size_t n = sc_.size();
  const std::vector<double> u = control_inputs(st_.t, st_.x);
  std::vector<VehicleSignals> out(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < n; ++j) {
    const Local l = read_local(st_.x, j);
    const FollowerConfig& f = sc_.followers[j];
    const VehicleGains& g = sc_.gains.vehicles[j];
    VehicleSignals& s = out[j];
    s.p = l.self.p;
    s.v = l.self.v;
    s.a = l.self.a;
    s.e = l.in.gap - f.spacing;
    s.u = u[j];
    s.q = unmodeled_q(l.self, u[j], disturbance(st_.t, f.disturbance).sigma, f.params, g.b_hat);
    if (sc_.controller == ControllerKind::Dsc) {
      const SurfaceSnapshot snap =
          evaluate_surfaces(l.in, f.spacing, l.fs, l.s + g.l * l.self.a, g);
      s.q_hat = l.s + g.l * l.self.a;
      s.e1 = observation_error(s.q, s.q_hat);
      s.gamma = st_.gamma[j];
      s.psi = s.gamma - u[j];
      s.z1 = snap.z1;
      s.z2 = snap.z2;
      s.eta1 = snap.eta1;
      s.eta2 = snap.eta2;
      s.V = 0.5 * (s.e * s.e + s.z1 * s.z1 + s.z2 * s.z2 + s.eta1 * s.eta1 + s.eta2 * s.eta2);
    } else {
      s.q_hat = s.e1 = s.gamma = s.psi = s.z1 = s.z2 = s.eta1 = s.eta2 = s.V = nan;
    }
  }
  return out;
}

SimTrace run(const Scenario& sc) {
  Simulator sim(sc);
  const double ratio = sc.horizon / sc.dt;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-6) {
    throw ConfigError("horizon: must be an integer multiple of dt");
  }
  SimTrace tr;
  tr.n_vehicles = sc.size();
  tr.controller = sc.controller;
  tr.dt = sc.dt;
  tr.steps = steps;
  const std::size_t rows = static_cast<std::size_t>(steps / sc.record_stride) + 2;
  tr.t.reserve(rows);
  tr.leader.reserve(rows);
  tr.u0.reserve(rows);
  tr.signals.reserve(rows * sc.size());

  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.leader.push_back(sim.leader_state());
    tr.u0.push_back(sc.profile.u0(t));
    const auto sig = sim.signals();
    tr.signals.insert(tr.signals.end(), sig.begin(), sig.end());
  };
  record(0.0);
  for (long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    sim.step_to(t);
    if (k % sc.record_stride == 0 || k == steps) record(t);
  }
  tr.events = sim.events();
  tr.thresholds = sim.thresholds();
  tr.final_state = sim.state().x;
  return tr;
}

}  // namespace platoon
