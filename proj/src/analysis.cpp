#include "platoon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace platoon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

const char* verdict(bool b) { return b ? "pass" : "fail"; }

}  // namespace

StringStability string_stability_verdict(const SimTrace& tr, double delta) {
  StringStability s;
  s.sup_e.assign(tr.n_vehicles, 0.0);
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      s.sup_e[i] = std::max(s.sup_e[i], std::abs(tr.at(r, i).e));
    }
  }
  for (double v : s.sup_e) s.max_sup_e = std::max(s.max_sup_e, v);
  s.pass = s.max_sup_e <= delta;
  return s;
}

ClosedLoop closed_loop_verdict(const SimTrace& tr, double epsilon, double window) {
  if (tr.rows() == 0) throw std::invalid_argument("closed-loop window: empty trace");
  const double t_end = tr.t.back();
  const double t_start = t_end - window;
  if (t_start < -1e-12) throw std::invalid_argument("closed-loop window: longer than the trace");
  ClosedLoop c;
  c.terminal_e.assign(tr.n_vehicles, 0.0);
  const double tol = 1e-9 * std::max(1.0, t_end);
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    if (tr.t[r] < t_start - tol) continue;
    if (tr.u0[r] != 0.0) {
      throw std::invalid_argument("closed-loop window: leader input is not zero inside the window");
    }
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      c.terminal_e[i] = std::max(c.terminal_e[i], std::abs(tr.at(r, i).e));
    }
  }
  for (double v : c.terminal_e) c.max_terminal_e = std::max(c.max_terminal_e, v);
  c.pass = c.max_terminal_e <= epsilon;
  return c;
}

EsoBound eso_verdict(const SimTrace& tr, const std::vector<double>& e1_bar) {
  if (e1_bar.size() != tr.n_vehicles) throw std::invalid_argument("eso verdict: one bound per vehicle");
  EsoBound b;
  b.sup_e1.assign(tr.n_vehicles, 0.0);
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      b.sup_e1[i] = std::max(b.sup_e1[i], std::abs(tr.at(r, i).e1));
    }
  }
  b.pass = true;
  for (std::size_t i = 0; i < tr.n_vehicles; ++i) b.pass = b.pass && b.sup_e1[i] <= e1_bar[i];
  return b;
}

ZenoCheck zeno_verdict(const std::vector<Event>& events, std::size_t n, const std::vector<double>& tau_min,
                       long steps) {
  if (tau_min.size() != n) throw std::invalid_argument("zeno verdict: one tau_min per vehicle");
  ZenoCheck z;
  z.min_gap.assign(n, kInf);
  z.triggers.assign(n, 0);
  std::vector<double> last(n, std::numeric_limits<double>::quiet_NaN());
  long total = 0;
  for (const Event& e : events) {
    if (e.vehicle >= n) throw std::invalid_argument("zeno verdict: event for unknown vehicle");
    if (z.triggers[e.vehicle] > 0) z.min_gap[e.vehicle] = std::min(z.min_gap[e.vehicle], e.t - last[e.vehicle]);
    last[e.vehicle] = e.t;
    ++z.triggers[e.vehicle];
    ++total;
  }
  z.reduction_ratio =
      steps > 0 ? 1.0 - static_cast<double>(total) / (static_cast<double>(steps) * static_cast<double>(n)) : 0.0;
  z.pass = true;
  for (std::size_t i = 0; i < n; ++i) z.pass = z.pass && z.min_gap[i] >= tau_min[i];
  return z;
}

LyapunovCheck lyapunov_verdict(const SimTrace& tr, double delta) {
  LyapunovCheck l;
  l.sup_V.assign(tr.n_vehicles, 0.0);
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      l.sup_V[i] = std::max(l.sup_V[i], tr.at(r, i).V);
    }
  }
  l.pass = true;
  for (double v : l.sup_V) l.pass = l.pass && v <= 0.5 * delta * delta;
  return l;
}

CollisionCheck collision_verdict(const SimTrace& tr) {
  CollisionCheck c;
  c.min_gap = kInf;
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    double prev = tr.leader[r].p;
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      c.min_gap = std::min(c.min_gap, prev - tr.at(r, i).p);
      prev = tr.at(r, i).p;
    }
  }
  c.pass = c.min_gap > 0.0;
  return c;
}

bool StabilityReport::all_pass() const {
  return string.pass && (!closed_loop_applicable || closed.pass) && eso.pass && zeno.pass &&
         lyapunov.pass && collision.pass;
}

StabilityReport analyze(const SimTrace& tr, const AnalysisInputs& in) {
  StabilityReport r;
  r.controller = tr.controller;
  r.inputs = in;
  r.string = string_stability_verdict(tr, in.delta);
  r.collision = collision_verdict(tr);
  try {
    r.closed = closed_loop_verdict(tr, in.epsilon, in.window);
  } catch (const std::invalid_argument&) {
    r.closed_loop_applicable = false;
  }
  if (tr.controller == ControllerKind::Dsc) {
    r.eso = eso_verdict(tr, in.e1_bar);
    r.zeno = zeno_verdict(tr.events, tr.n_vehicles, in.tau_min, tr.steps);
    r.lyapunov = lyapunov_verdict(tr, in.delta);
  } else {
    r.eso.pass = r.zeno.pass = r.lyapunov.pass = true;
  }
  return r;
}

std::string format_stability(const StabilityReport& r) {
  std::ostringstream os;
  const bool dsc = r.controller == ControllerKind::Dsc;
  const std::size_t n = r.string.sup_e.size();
  os << "controller=" << to_string(r.controller) << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << "vehicle=" << i + 1 << " sup_e=" << fmt(r.string.sup_e[i]);
    if (r.closed_loop_applicable) os << " terminal_e=" << fmt(r.closed.terminal_e[i]);
    if (dsc) {
      os << " sup_e1=" << fmt(r.eso.sup_e1[i]) << " e1_bar=" << fmt(r.inputs.e1_bar[i])
         << " min_event_gap=" << fmt(r.zeno.min_gap[i]) << " tau_min=" << fmt(r.inputs.tau_min[i])
         << " triggers=" << r.zeno.triggers[i] << " sup_V=" << fmt(r.lyapunov.sup_V[i]);
    }
    os << "\n";
  }
  os << "verdict string_stable=" << verdict(r.string.pass) << " max_sup_e=" << fmt(r.string.max_sup_e)
     << " delta=" << fmt(r.inputs.delta) << "\n";
  if (r.closed_loop_applicable) {
    os << "verdict closed_loop=" << verdict(r.closed.pass) << " max_terminal_e=" << fmt(r.closed.max_terminal_e)
       << " epsilon=" << fmt(r.inputs.epsilon) << " window=" << fmt(r.inputs.window) << "\n";
  } else {
    os << "verdict closed_loop=not_applicable reason=leader_active_or_short_trace\n";
  }
  os << "verdict collision_free=" << verdict(r.collision.pass) << " min_gap=" << fmt(r.collision.min_gap)
     << "\n";
  if (dsc) {
    os << "verdict eso_bounded=" << verdict(r.eso.pass) << "\n";
    os << "verdict zeno_free=" << verdict(r.zeno.pass) << " reduction_ratio=" << fmt(r.zeno.reduction_ratio)
       << "\n";
    os << "verdict lyapunov=" << verdict(r.lyapunov.pass) << " bound=" << fmt(0.5 * r.inputs.delta * r.inputs.delta)
       << "\n";
  }
  os << "overall=" << verdict(r.all_pass()) << "\n";
  return os.str();
}

}  // namespace platoon
