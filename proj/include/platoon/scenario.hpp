#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/controller.hpp"
#include "platoon/dynamics.hpp"

namespace platoon {

/// Raised for malformed or out-of-range configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ControllerKind { Dsc, Baseline };

/// Where the observer trigger condition is evaluated. `Exact` locates the
/// crossing |psi| = M inside the integration step; `Step` only checks at the
/// end of each step.
enum class TriggerLocation { Exact, Step };

struct LeaderSegment {
  enum class Shape { Constant, RaisedCosine };

  double t_start = 0.0;
  double t_end = 0.0;
  Shape shape = Shape::Constant;
  double magnitude = 0.0;  // m/s^2; peak value for RaisedCosine
};

/// Piecewise leader input u0(t); zero outside every segment.
struct LeaderProfile {
  std::vector<LeaderSegment> segments;

  double u0(double t) const;
  double u0_bound() const;
  /// Integral of |u0| over all time.
  double integral_abs() const;
  /// True when u0 vanishes on the whole closed interval [t0, t1].
  bool quiescent(double t0, double t1) const;
  void validate() const;
};

/// Three-stage manoeuvre: cruise on [0,6), a smooth raised-cosine acceleration
/// pulse on [6,9) peaking at 2 m/s^2, cruise again from 9 s.
LeaderProfile leader_maneuver_default();

struct FollowerConfig {
  VehicleParams params;
  DisturbanceParams disturbance;
  KinematicState initial;
  double spacing = 8.0;  // desired gap r_i, m
  double s0 = 0.0;       // observer middle variable at t = 0
};

struct Scenario {
  std::string name = "reference";
  std::uint64_t seed = 1;
  double dt = 1e-4;
  double horizon = 15.0;
  long record_stride = 1;
  double terminal_window = 2.0;
  ControllerKind controller = ControllerKind::Dsc;
  TriggerLocation trigger_location = TriggerLocation::Exact;

  LeaderParams leader;
  KinematicState leader_initial;
  LeaderProfile profile;

  ModelBounds bounds;
  std::vector<FollowerConfig> followers;
  GainSet gains;
  BaselineGains baseline;

  std::size_t size() const { return followers.size(); }
  std::vector<double> spacings() const;
  void validate() const;
};

/// Reads a YAML scenario file. Every key is optional; missing keys take the
/// defaults of the eight-vehicle reference scenario.
Scenario build_scenario(const std::string& path);
Scenario build_scenario_from_string(const std::string& yaml_text);

/// Reference scenario: eight followers, Table-1 initial states, r = 8 m, delta = 7 m.
Scenario default_scenario();

/// Uniform double in [lo, hi]. Maps the raw 64-bit Mersenne Twister output by
/// hand instead of using std::uniform_real_distribution, whose algorithm is
/// implementation-defined.
class UniformDraw {
 public:
  explicit UniformDraw(std::uint64_t seed) : engine_(seed) {}
  double operator()(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

std::string to_string(ControllerKind kind);
ControllerKind parse_controller(const std::string& s);

}  // namespace platoon
