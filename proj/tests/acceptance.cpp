// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "platoon/analysis.hpp"
#include "platoon/cli.hpp"
#include "platoon/engine.hpp"
#include "platoon/synthesis.hpp"

using namespace platoon;

namespace {

std::string config(const char* name) { return std::string(PLATOON_CONFIG_DIR) + "/" + name; }

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// FNV-1a over the raw bytes of everything a run produces.
std::uint64_t fingerprint(const SimTrace& tr) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < n; ++k) h = (h ^ b[k]) * 1099511628211ull;
  };
  mix(tr.t.data(), tr.t.size() * sizeof(double));
  mix(tr.signals.data(), tr.signals.size() * sizeof(VehicleSignals));
  mix(tr.final_state.data(), tr.final_state.size() * sizeof(double));
  for (const Event& e : tr.events) {
    mix(&e.vehicle, sizeof e.vehicle);
    mix(&e.t, sizeof e.t);
  }
  return h;
}

struct RunSummary {
  std::string name;
  StabilityReport report;
  bool verified = false;
  std::uint64_t hash = 0;
  double seconds = 0;
};

RunSummary simulate(const std::string& name, const Scenario& sc) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary s;
  s.name = name;
  s.verified = verify_all(sc).all_pass();
  const SimTrace tr = run(sc);
  s.report = analyze(tr, analysis_inputs(sc));
  s.hash = fingerprint(tr);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  run %s: %.1f s, %zu events, overall=%s\n", name.c_str(), s.seconds, tr.events.size(),
              s.report.all_pass() ? "pass" : "fail");
  return s;
}

Scenario load(const char* name, long stride = 1) {
  Scenario sc = build_scenario(config(name));
  sc.record_stride = stride;
  return sc;
}

Outcome derived_constants() {
  const ModelBounds b = load("reference.yaml").bounds;
  const BWindow w = compute_b_window(b);
  const double b_hi = 1.0 / 300, b_lo = 1.0 / 800;
  const double lower = std::max(1.0 / 800, 1.0 / 600);
  const double cb = compute_cb_bar(w.b_lo, w.b_hi, 0.003);
  const double cb_oracle = std::max((b_hi - 0.003) / 0.003, (0.003 - b_lo) / 0.003);
  Outcome o;
  o.pass = std::abs(w.b_hi - b_hi) <= 1e-18 && std::abs(w.b_lo - b_lo) <= 1e-18 &&
           std::abs(w.lower - lower) <= 1e-18 && w.contains(0.003) && 0.003 > lower && 0.003 <= b_hi &&
           std::abs(cb - 7.0 / 12.0) <= 1e-12 && std::abs(cb - cb_oracle) <= 1e-15;
  o.detail = "b_hi=" + num(w.b_hi) + " b_lo=" + num(w.b_lo) + " window=(" + num(w.lower) + ", " + num(w.upper) +
             "] b_hat=0.003 inside, cb_bar=" + num(cb);
  return o;
}

Outcome c1_table() {
  const Scenario sc = load("reference.yaml");
  const VerificationReport rep = verify_all(sc);
  double worst = 0;
  bool all = true;
  for (std::size_t i = 0; i < sc.size(); ++i) {
    for (const Condition& c : rep.conditions) {
      if (c.name == "v" + std::to_string(i + 1) + ".C1") {
        all = all && c.pass && c.required == 49.0;
        worst = std::max(worst, c.actual);
      }
    }
  }
  // Independent arithmetic: vehicle 7 has v_d = 11.5 - 13.5 = -2 and a = 0.
  const double oracle = 4.0 / 4.0 + 9.0 / 64.0;
  Outcome o;
  o.pass = all && worst == oracle;
  o.detail = "all 8 pass, largest left side=" + num(worst) + " (vehicle 7, oracle 73/64) bound=49";
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

  std::printf("simulating acceptance runs\n");
  const RunSummary s5 = simulate("reference", load("reference.yaml"));
  const RunSummary s5_again = simulate("reference_rerun", load("reference.yaml"));
  const RunSummary e001 = simulate("reference_eps001", load("reference_eps001.yaml"));
  Scenario base_sc = load("reference.yaml");
  base_sc.controller = ControllerKind::Baseline;
  const RunSummary base = simulate("reference_baseline", base_sc);
  const RunSummary syn = simulate("synthesized", load("synthesized.yaml"));
  const RunSummary eq = simulate("equilibrium", load("equilibrium.yaml", 10));
  const std::vector<const RunSummary*> dsc_runs{&s5, &s5_again, &e001, &syn, &eq};

  criteria.emplace_back("derived constants", derived_constants);
  criteria.emplace_back("initial-state condition C1", c1_table);

  criteria.emplace_back("string stability and collision-free", [&] {
    const auto& r = s5.report;
    Outcome o;
    o.pass = r.string.pass && r.collision.pass;
    o.detail = "max sup|e|=" + num(r.string.max_sup_e) + " <= 7 (margin " + num(7 - r.string.max_sup_e) +
               " m), min gap=" + num(r.collision.min_gap) + " m";
    return o;
  });

  criteria.emplace_back("closed-loop precision", [&] {
    const auto& a = s5.report;
    const auto& b = e001.report;
    Outcome o;
    o.pass = a.closed_loop_applicable && b.closed_loop_applicable && a.closed.max_terminal_e <= 0.2 &&
             b.closed.max_terminal_e < a.closed.max_terminal_e;
    o.detail = "terminal max|e| eps=0.1: " + num(a.closed.max_terminal_e) +
               " <= 0.2, eps=0.01: " + num(b.closed.max_terminal_e) + " (smaller)";
    return o;
  });

  criteria.emplace_back("observer error bound", [&] {
    Outcome o;
    o.pass = syn.verified && syn.report.eso.pass;
    o.detail = "synthesized (verified): sup|e1|=" + num(syn.report.eso.sup_e1[0]) +
               " <= " + num(syn.report.inputs.e1_bar[0]);
    for (const RunSummary* r : {&s5, &e001}) {
      std::size_t within = 0;
      for (std::size_t i = 0; i < r->report.eso.sup_e1.size(); ++i) {
        within += r->report.eso.sup_e1[i] <= r->report.inputs.e1_bar[i];
      }
      o.detail += "; " + r->name + (r->verified ? "" : " (conditions flagged, reported)") + ": " +
                  std::to_string(within) + "/" + std::to_string(r->report.eso.sup_e1.size()) + " within bound";
    }
    return o;
  });

  criteria.emplace_back("Zeno-freeness", [&] {
    Outcome o;
    o.pass = s5.report.zeno.reduction_ratio > 0.5;
    for (const RunSummary* r : dsc_runs) {
      o.pass = o.pass && r->report.zeno.pass;
      double worst = INFINITY;
      for (std::size_t i = 0; i < r->report.zeno.min_gap.size(); ++i) {
        worst = std::min(worst, r->report.zeno.min_gap[i] / r->report.inputs.tau_min[i]);
      }
      o.detail += r->name + " min gap/tau_min=" + num(worst) + "; ";
    }
    o.detail += "reference reduction ratio=" + num(s5.report.zeno.reduction_ratio) + " > 0.5";
    return o;
  });

  criteria.emplace_back("baseline comparison", [&] {
    const auto& d = s5.report.string.sup_e;
    const auto& b = base.report.string.sup_e;
    std::size_t larger = 0;
    std::string pairs;
    for (std::size_t i = 0; i < d.size(); ++i) {
      larger += b[i] > d[i];
      pairs += " " + num(b[i]) + "/" + num(d[i]);
    }
    Outcome o;
    o.pass = larger >= 7;
    o.detail = "baseline peak larger for " + std::to_string(larger) + "/8 (baseline/designed:" + pairs + ")";
    return o;
  });

  criteria.emplace_back("numerical integrity", [&] {
    Scenario sc = load("reference.yaml", 1000000);
    std::vector<std::vector<double>> xs;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
      sc.dt = dt;
      xs.push_back(run(sc).final_state);
    }
    // Contraction per follower state kind (p, v, a, s, beta1, beta2).
    double worst = INFINITY;
    for (std::size_t comp = 0; comp < 6; ++comp) {
      double d1 = 0, d2 = 0;
      for (std::size_t k = 3 + comp; k < xs[0].size(); k += 6) {
        d1 = std::max(d1, std::abs(xs[0][k] - xs[1][k]));
        d2 = std::max(d2, std::abs(xs[1][k] - xs[2][k]));
      }
      worst = std::min(worst, d2 > 0 ? d1 / d2 : (d1 > 0 ? INFINITY : 16.0));
    }
    const double drift = eq.report.string.max_sup_e;
    Outcome o;
    o.pass = worst >= 8 && drift < 1e-9 && s5.hash == s5_again.hash;
    o.detail = "step-halving contraction min=" + num(worst) + "x, equilibrium drift=" + num(drift) +
               " m, reruns " + (s5.hash == s5_again.hash ? "bit-identical" : "differ");
    return o;
  });

  criteria.emplace_back("Lyapunov surrogate", [&] {
    const double bound = 0.5 * syn.report.inputs.delta * syn.report.inputs.delta;
    Outcome o;
    o.pass = syn.verified && syn.report.lyapunov.pass;
    o.detail = "synthesized (verified): sup V=" + num(syn.report.lyapunov.sup_V[0]) + " <= " + num(bound);
    return o;
  });

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failures += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
