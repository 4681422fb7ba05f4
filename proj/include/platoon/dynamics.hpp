#pragma once

// Longitudinal vehicle models for a leader/follower platoon.
//
// The leader is a pure first-order acceleration lag driven by an external
// input u0 (m/s^2). Followers carry drag, rolling resistance and an inertial
// delay; their input u is the raw engine command, scaled by 1/(m*tau).

namespace platoon {

inline constexpr double kGravity = 9.81;

struct KinematicState {
  double p = 0.0;  // m
  double v = 0.0;  // m/s
  double a = 0.0;  // m/s^2
};

struct KinematicRate {
  double p_dot = 0.0;
  double v_dot = 0.0;
  double a_dot = 0.0;
};

struct LeaderParams {
  double tau0 = 0.5;      // s
  double u0_bound = 0.0;  // sup |u0|, m/s^2
  double v0_bound = 0.0;  // sup |v0|, m/s

  void validate() const;
};

struct VehicleParams {
  double m = 1500.0;  // kg
  double c = 0.3;     // air drag coefficient
  double mu = 0.03;   // rolling resistance coefficient
  double tau = 0.3;   // s
  double g = kGravity;

  /// True control gain b = 1/(m*tau).
  double control_gain() const { return 1.0 / (m * tau); }
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct ModelBounds {
  Interval m;
  Interval c;
  Interval mu;
  Interval tau;

  void validate() const;
  bool contains(const VehicleParams& p) const;
};

/// sigma(t) = lam1*exp(-lam2*t) + lam3*sin(lam4*t)
struct DisturbanceParams {
  double lam1 = 0.0;  // m/s^3
  double lam2 = 0.0;  // 1/s
  double lam3 = 0.0;  // m/s^3
  double lam4 = 0.0;  // rad/s

  void validate() const;
};

struct DisturbanceSample {
  double sigma = 0.0;
  double sigma_dot = 0.0;
  double sigma1_bound = 0.0;  // sup |sigma|
  double sigma2_bound = 0.0;  // sup |sigma_dot|
};

KinematicRate leader_deriv(const KinematicState& state, double u0, const LeaderParams& params);

KinematicRate follower_deriv(const KinematicState& state, double u, double sigma,
                             const VehicleParams& params);

/// Lumped unmodeled dynamics q, so that a_dot = q + b_hat*u.
double unmodeled_q(const KinematicState& state, double u, double sigma,
                   const VehicleParams& params, double b_hat);

/// Time derivative of q along a trajectory. Diagnostic only; the observer never sees it.
double unmodeled_w(const KinematicState& state, double a_dot, double u_dot, double sigma_dot,
                   const VehicleParams& params, double b_hat);

DisturbanceSample disturbance(double t, const DisturbanceParams& dp);

}  // namespace platoon
