#include "platoon/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace platoon {
namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

void require_finite(const KinematicState& s) {
  require_finite(s.p, "position");
  require_finite(s.v, "velocity");
  require_finite(s.a, "acceleration");
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

void validate_interval(const Interval& iv, const char* what) {
  if (!(iv.lo > 0.0) || !(iv.lo <= iv.hi) || !std::isfinite(iv.hi)) {
    throw std::invalid_argument(std::string("bounds.") + what + " must satisfy 0 < lo <= hi");
  }
}

}  // namespace

void LeaderParams::validate() const {
  require_positive(tau0, "leader.tau0");
  if (!(u0_bound >= 0.0) || !(v0_bound >= 0.0)) {
    throw std::invalid_argument("leader bounds must be non-negative");
  }
}

void VehicleParams::validate() const {
  require_positive(m, "vehicle mass");
  require_positive(tau, "vehicle inertial delay");
  require_positive(g, "gravity");
  // Zero drag/rolling is allowed for idealised test vehicles.
  if (!(c >= 0.0) || !(mu >= 0.0)) {
    throw std::invalid_argument("vehicle drag and rolling coefficients must be non-negative");
  }
}

void ModelBounds::validate() const {
  validate_interval(m, "m");
  validate_interval(c, "c");
  validate_interval(mu, "mu");
  validate_interval(tau, "tau");
}

bool ModelBounds::contains(const VehicleParams& p) const {
  return m.contains(p.m) && c.contains(p.c) && mu.contains(p.mu) && tau.contains(p.tau);
}

void DisturbanceParams::validate() const {
  if (!(lam1 >= 0.0) || !(lam2 >= 0.0) || !(lam3 >= 0.0) || !(lam4 >= 0.0)) {
    throw std::invalid_argument("disturbance parameters must be non-negative");
  }
}

KinematicRate leader_deriv(const KinematicState& state, double u0, const LeaderParams& params) {
  require_finite(state);
  require_finite(u0, "leader input");
  return {state.v, state.a, (-state.a + u0) / params.tau0};
}

KinematicRate follower_deriv(const KinematicState& state, double u, double sigma,
                             const VehicleParams& params) {
  require_finite(state);
  require_finite(u, "control input");
  require_finite(sigma, "disturbance");
  const double m = params.m;
  const double tau = params.tau;
  const double a_dot = -state.a / tau - params.c * state.v * state.v / (m * tau) -
                       params.g * params.mu / tau - 2.0 * params.c * state.v * state.a / m +
                       u / (m * tau) + sigma;
  return {state.v, state.a, a_dot};
}

double unmodeled_q(const KinematicState& state, double u, double sigma,
                   const VehicleParams& params, double b_hat) {
  if (!(b_hat > 0.0)) throw std::invalid_argument("b_hat must be positive");
  require_finite(state);
  require_finite(u, "control input");
  require_finite(sigma, "disturbance");
  const double m = params.m;
  const double tau = params.tau;
  return -state.a / tau - params.c * state.v * state.v / (m * tau) - params.g * params.mu / tau -
         2.0 * params.c * state.v * state.a / m + (params.control_gain() - b_hat) * u + sigma;
}

double unmodeled_w(const KinematicState& state, double a_dot, double u_dot, double sigma_dot,
                   const VehicleParams& params, double b_hat) {
  if (!(b_hat > 0.0)) throw std::invalid_argument("b_hat must be positive");
  const double m = params.m;
  const double tau = params.tau;
  const double c = params.c;
  return -a_dot / tau - 2.0 * c * state.v * state.a / (m * tau) - 2.0 * c * state.a * state.a / m -
         2.0 * c * state.v * a_dot / m + (params.control_gain() - b_hat) * u_dot + sigma_dot;
}

DisturbanceSample disturbance(double t, const DisturbanceParams& dp) {
  if (!(t >= 0.0)) throw std::invalid_argument("disturbance time must be non-negative");
  const double decay = std::exp(-dp.lam2 * t);
  DisturbanceSample out;
  out.sigma = dp.lam1 * decay + dp.lam3 * std::sin(dp.lam4 * t);
  out.sigma_dot = -dp.lam1 * dp.lam2 * decay + dp.lam3 * dp.lam4 * std::cos(dp.lam4 * t);
  out.sigma1_bound = dp.lam1 + dp.lam3;
  out.sigma2_bound = dp.lam1 * dp.lam2 + dp.lam3 * dp.lam4;
  return out;
}

}  // namespace platoon
