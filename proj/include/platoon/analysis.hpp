#pragma once

#include <string>
#include <vector>

#include "platoon/engine.hpp"

namespace platoon {

struct StringStability {
  std::vector<double> sup_e;  // per vehicle sup |e|
  double max_sup_e = 0.0;
  bool pass = false;
};

/// max_i sup_t |e_i(t)| <= delta over the whole trace.
StringStability string_stability_verdict(const SimTrace& tr, double delta);

struct ClosedLoop {
  std::vector<double> terminal_e;  // per vehicle max |e| inside the window
  double max_terminal_e = 0.0;
  bool pass = false;
};

/// Terminal-window surrogate for limsup |e_i| <= epsilon. Throws std::invalid_argument
/// when the window is longer than the trace or the leader input is non-zero inside it.
ClosedLoop closed_loop_verdict(const SimTrace& tr, double epsilon, double window);

struct EsoBound {
  std::vector<double> sup_e1;
  bool pass = false;
};

EsoBound eso_verdict(const SimTrace& tr, const std::vector<double>& e1_bar);

struct ZenoCheck {
  std::vector<double> min_gap;  // +inf when a vehicle fired at most once
  std::vector<long> triggers;
  double reduction_ratio = 0.0;  // 1 - transmissions / (steps * vehicles)
  bool pass = false;
};

ZenoCheck zeno_verdict(const std::vector<Event>& events, std::size_t n_vehicles,
                       const std::vector<double>& tau_min, long steps);

struct LyapunovCheck {
  std::vector<double> sup_V;
  bool pass = false;
};

LyapunovCheck lyapunov_verdict(const SimTrace& tr, double delta);

struct CollisionCheck {
  double min_gap = 0.0;  // smallest p_{i-1} - p_i seen
  bool pass = false;
};

CollisionCheck collision_verdict(const SimTrace& tr);

struct AnalysisInputs {
  double delta = 7.0;
  double epsilon = 0.1;
  double window = 2.0;
  std::vector<double> e1_bar;
  std::vector<double> tau_min;
};

struct StabilityReport {
  ControllerKind controller = ControllerKind::Dsc;
  StringStability string;
  ClosedLoop closed;
  bool closed_loop_applicable = true;
  EsoBound eso;
  ZenoCheck zeno;
  LyapunovCheck lyapunov;
  CollisionCheck collision;
  AnalysisInputs inputs;

  bool string_stable() const { return string.pass; }
  bool closed_loop_ok() const { return closed_loop_applicable && closed.pass; }
  bool eso_bounded() const { return eso.pass; }
  bool zeno_free() const { return zeno.pass; }
  bool all_pass() const;
};

/// Observer, trigger and Lyapunov checks are skipped for the baseline controller.
StabilityReport analyze(const SimTrace& tr, const AnalysisInputs& in);

std::string format_stability(const StabilityReport& r);

}  // namespace platoon
