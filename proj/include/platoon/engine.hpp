#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/scenario.hpp"

namespace platoon {

/// Raised when the integrated state stops being finite.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleSignals {
  double p = 0.0;
  double v = 0.0;
  double a = 0.0;
  double e = 0.0;
  double u = 0.0;
  double q = 0.0;
  double q_hat = 0.0;
  double e1 = 0.0;
  double psi = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double gamma = 0.0;
  double V = 0.0;
};

struct Event {
  std::size_t vehicle = 0;  // zero-based follower index
  double t = 0.0;
};

struct SimTrace {
  std::size_t n_vehicles = 0;
  ControllerKind controller = ControllerKind::Dsc;
  double dt = 0.0;
  long steps = 0;
  std::vector<double> t;
  std::vector<KinematicState> leader;
  std::vector<double> u0;
  std::vector<VehicleSignals> signals;  // row-major, n_vehicles per row
  std::vector<Event> events;
  std::vector<double> thresholds;  // trigger threshold per vehicle
  std::vector<double> final_state;

  std::size_t rows() const { return t.size(); }
  const VehicleSignals& at(std::size_t row, std::size_t i) const {
    return signals[row * n_vehicles + i];
  }
};

/// Integrated state. Layout of `x`: leader (p, v, a), then per follower
/// (p, v, a, s, beta1, beta2).
struct PlatoonState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> gamma;
};

class Simulator {
 public:
  explicit Simulator(Scenario sc);

  const PlatoonState& state() const { return st_; }
  const std::vector<Event>& events() const { return events_; }
  const std::vector<double>& thresholds() const { return M_; }

  /// Advances by dt, firing observer transmissions as they occur.
  void step(double dt);
  void step_to(double t_end);
  std::vector<VehicleSignals> signals() const;
  KinematicState leader_state() const { return {st_.x[0], st_.x[1], st_.x[2]}; }

 private:
  Scenario sc_;
  PlatoonState st_;
  std::vector<double> M_;
  std::vector<Event> events_;
  mutable std::vector<double> k1_, k2_, k3_, k4_, tmp_;

  void rhs(double t, const std::vector<double>& x, const std::vector<double>& gamma,
           std::vector<double>& dx) const;
  void rk4(double t, const std::vector<double>& x, double h, std::vector<double>& out) const;
  std::vector<double> control_inputs(double t, const std::vector<double>& x) const;
  double trigger_margin(double t, const std::vector<double>& x) const;
  void fire_due(double t);
  void check_finite(const std::vector<double>& x, double t) const;
};

/// Runs the scenario over its horizon and records every `record_stride`-th step.
SimTrace run(const Scenario& sc);

}  // namespace platoon
