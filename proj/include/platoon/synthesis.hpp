#pragma once

// Derived constants of the observer and stability analysis, condition checks
// for a candidate gain set, and a front-to-back gain suggester.

#include <optional>
#include <string>
#include <vector>

#include "platoon/controller.hpp"
#include "platoon/dynamics.hpp"
#include "platoon/scenario.hpp"

namespace platoon {

/// Admissible nominal gains: b_hat > b_hi/2, b_hat >= b_lo, b_hat <= b_hi.
/// The lower end is inclusive only when it is set by b_lo, so exactly known
/// vehicles (b_lo = b_hi) admit b_hat = b.
struct BWindow {
  double b_lo = 0.0;
  double b_hi = 0.0;
  double lower = 0.0;
  double upper = 0.0;  // inclusive
  bool lower_inclusive = false;

  bool contains(double b_hat) const {
    return (lower_inclusive ? lower <= b_hat : lower < b_hat) && b_hat <= upper;
  }
};

BWindow compute_b_window(const ModelBounds& bounds);

double compute_cb_bar(double b_lo, double b_hi, double b_hat);

struct E1Inputs {
  KinematicState initial;
  double u0 = 0.0;      // control input at t = 0
  double q_hat0 = 0.0;  // observer estimate at t = 0
  double sigma1 = 0.0;
  double tau_true = 0.0;
};

double compute_e1_bar(const E1Inputs& in, const ModelBounds& bounds, double b_hat,
                      double g = kGravity);

struct ChainEntry {
  double v_bar = 0.0;
  double a_bar = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
};

/// Velocity and acceleration bounds down the platoon, front to back.
std::vector<ChainEntry> propagate_chain(const GainSet& gains, double v_bar0, double a_bar0);

double alpha3(const VehicleGains& g, double a_bar_prev, double delta);
double alpha4(const VehicleGains& g, double alpha3, double delta);
double a_bar(const VehicleGains& g, double delta);

enum class Relation { LessEq, GreaterEq, Less, Greater };

struct Condition {
  std::string name;
  Relation relation = Relation::LessEq;
  double required = 0.0;
  double actual = 0.0;
  double margin = 0.0;  // relative slack; positive means satisfied
  bool pass = false;
};

Condition make_condition(std::string name, Relation rel, double actual, double required);

struct C1Result {
  double lhs = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// v_d^2/h1^2 + (a - k2*v_d)^2/h2^2 <= delta^2 with v_d = v_prev - v.
C1Result check_c1(double v_d0, double a0, const VehicleGains& g, double delta);

struct GainBounds {
  double k1_min = 0.0;
  double k2_min = 0.0;
  double k3_min = 0.0;
  double kappa1_max = 0.0;
  double kappa2_max = 0.0;
};

GainBounds gain_bounds(const VehicleGains& g, double epsilon, double e1_bar, double alpha3,
                       double alpha4);

/// Conditions on k1, k2, k3, kappa1, kappa2 for one vehicle, names prefixed with `prefix`.
std::vector<Condition> check_c2_c3(const VehicleGains& g, double epsilon, double e1_bar,
                                   double alpha3, double alpha4, const std::string& prefix);

struct CConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

struct CInputs {
  double cb_bar = 0.0;
  double v_bar = 0.0;
  double a_bar = 0.0;
  double alpha4 = 0.0;
  double sigma2 = 0.0;
  double delta = 0.0;
};

CConstants compute_c_constants(const VehicleGains& g, const CInputs& in, const ModelBounds& bounds);

struct ObserverRequirements {
  double l_min = 0.0;
  double M = 0.0;  // threshold implied by the observer bound at the given l
};

/// Throws std::domain_error when cb_bar >= 1.
ObserverRequirements observer_requirements(double c1, double c2, double cb_bar, double e1_bar,
                                           double b_hat, double l);

struct ZenoBound {
  double B = 0.0;
  double tau_min = 0.0;
};

ZenoBound zeno_bound(const VehicleGains& g, double e1_bar, double alpha4, double delta, double M);

struct InitialErrorBound {
  double A0 = 0.0;
  double B0 = 0.0;
  double C0 = 0.0;
  double iota = 0.0;
  bool admissible = false;  // false when C0 > 0
};

InitialErrorBound admissible_initial_error(double v_d0, double a0, const VehicleGains& g,
                                           double delta);

double rho(const VehicleGains& g, double e1_bar, double alpha3, double alpha4);

struct DerivedBounds {
  double b_hi = 0.0;
  double b_lo = 0.0;
  double cb_bar = 0.0;
  double e1_bar = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double v_bar = 0.0;
  double a_bar = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double l_min = 0.0;
  double M = 0.0;       // from the observer bound
  double M_used = 0.0;  // threshold the simulation applies
  double B = 0.0;
  double tau_min = 0.0;
  double rho = 0.0;
  double iota = 0.0;
  double u0 = 0.0;
  double q_hat0 = 0.0;
  double e0 = 0.0;
};

struct VerificationReport {
  double a_bar_0 = 0.0;
  double v_bar_0 = 0.0;
  std::vector<DerivedBounds> vehicles;
  std::vector<Condition> conditions;

  bool all_pass() const;
  std::vector<const Condition*> failures() const;
};

/// Initial control input and observer estimate for follower i of the scenario.
struct InitialControl {
  double u = 0.0;
  double q_hat = 0.0;
  double e = 0.0;
};
InitialControl initial_control(const Scenario& sc, std::size_t i);

/// Threshold to simulate with: the configured one, else the observer-bound value.
double threshold_in_use(const VehicleGains& g, const DerivedBounds& d);

VerificationReport verify_all(const Scenario& sc);

struct SuggestOptions {
  double margin = 0.05;
  std::optional<double> b_hat;  // default: midpoint of [b_lo, b_hi]
  int max_iterations = 200;
};

struct SuggestResult {
  bool feasible = false;
  std::string reason;
  GainSet gains;
  VerificationReport report;
};

/// Chooses k1, k2, k3, kappa1, kappa2, l and M per vehicle in dependency order,
/// keeping h1, h2, xi, delta and epsilon from the scenario. The result is re-verified.
SuggestResult suggest(const Scenario& sc, const SuggestOptions& opt = {});

std::string format_report(const VerificationReport& report);
std::string to_string(Relation r);

}  // namespace platoon
