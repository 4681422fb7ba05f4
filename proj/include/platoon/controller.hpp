#pragma once

#include <optional>
#include <vector>

namespace platoon {

/// Tunables of one follower's modified dynamic-surface controller and observer.
struct VehicleGains {
  double k1 = 0.8;
  double k2 = 1.5;
  double k3 = 300.0;
  double h1 = 2.0;       // virtual velocity gain
  double h2 = 8.0;       // virtual acceleration gain
  double kappa1 = 0.05;  // filter time constant, s
  double kappa2 = 0.01;  // filter time constant, s
  double l = 1200.0;     // observer gain
  double b_hat = 0.003;
  double xi = 0.002;  // slack in the Lyapunov bound
  // Trigger threshold; empty means "use the value implied by the observer bound".
  std::optional<double> trigger_threshold;

  void validate() const;
};

struct GainSet {
  std::vector<VehicleGains> vehicles;
  double delta = 7.0;    // safe spacing error, m
  double epsilon = 0.1;  // control precision, m

  void validate(const std::vector<double>& spacings) const;
};

/// Everything the controller may read: on-board sensor data only.
struct SensorReading {
  double v = 0.0;       // own velocity
  double a = 0.0;       // own acceleration
  double v_prev = 0.0;  // preceding vehicle velocity (radar)
  double gap = 0.0;     // p_prev - p_self (radar)
};

struct FilterState {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

struct FilterRate {
  double beta1_dot = 0.0;
  double beta2_dot = 0.0;
};

struct SurfaceSnapshot {
  double e = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double u = 0.0;
};

double spacing_error(double p_prev, double p_self, double r);

double alpha1(double v_prev, double e, const VehicleGains& g);
double alpha2(double z1, double eta1, double e, const VehicleGains& g);
double control_u(double q_hat, double z1, double z2, double eta2, const VehicleGains& g);
FilterRate filter_derivs(const FilterState& fs, double alpha1, double alpha2,
                         const VehicleGains& g);

/// Evaluates the surfaces and the control law at the current filter state.
SurfaceSnapshot evaluate_surfaces(const SensorReading& in, double r, const FilterState& fs,
                                  double q_hat, const VehicleGains& g);

/// Filter state with beta_k(0) = alpha_k(0), so both filter errors start at zero.
FilterState initial_filter_state(const SensorReading& in, double r, const VehicleGains& g);

struct ControllerStepResult {
  double u = 0.0;
  FilterState next;
  SurfaceSnapshot snapshot;
};

/// Standalone controller update: evaluates u at the current state and advances the
/// filters by one RK4 step of length dt with the sensor readings and q_hat frozen.
ControllerStepResult controller_step(const SensorReading& in, double r, const FilterState& fs,
                                     double q_hat, const VehicleGains& g, double dt);

/// Linear comparison controller u = kp*e + kv*v_d + ka*a_prev + kd*a_self.
struct BaselineGains {
  double kp = 2000.0;
  double kv = 4000.0;
  double ka = 2000.0;
  double kd = 100.0;
};

double baseline_u(double e, double v_diff, double a_prev, double a_self, const BaselineGains& k);

}  // namespace platoon
