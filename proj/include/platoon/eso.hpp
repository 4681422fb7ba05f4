#pragma once

// Event-triggered extended state observer.
//
//   s_dot = -l*s - l^2*a - l*b_hat*gamma,  s(0) = 0
//   q_hat = s + l*a
//
// gamma is the last control input the controller transmitted. A new value is
// sent when |gamma - u| reaches the threshold M.

namespace platoon {

struct EsoParams {
  double l = 0.0;      // observer gain, 1/s
  double b_hat = 0.0;  // nominal control gain
  double M = 0.0;      // trigger threshold, control-input units

  void validate() const;
};

struct EsoState {
  double s = 0.0;
  double gamma = 0.0;
  double last_trigger_t = 0.0;
  long trigger_count = 0;
};

double eso_deriv(const EsoState& es, double a, const EsoParams& params);

double estimate_q(const EsoState& es, double a, const EsoParams& params);

struct TriggerResult {
  bool fired = false;
  double psi = 0.0;  // sampling error gamma - u after the check
  EsoState state;
};

/// Fires when |gamma - u_now| >= M; a fired check resets psi to zero.
TriggerResult trigger_check(const EsoState& es, double u_now, const EsoParams& params, double t);

/// Records the first transmission at t = 0.
EsoState initial_eso_state(double u0, double s0 = 0.0);

inline double observation_error(double q_true, double q_hat) { return q_true - q_hat; }

}  // namespace platoon
