#include "platoon/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace platoon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double x) { return x * x; }

SensorReading initial_reading(const Scenario& sc, std::size_t i) {
  const KinematicState& self = sc.followers[i].initial;
  const KinematicState& prev = i == 0 ? sc.leader_initial : sc.followers[i - 1].initial;
  return {self.v, self.a, prev.v, prev.p - self.p};
}

InitialControl initial_control_for(const Scenario& sc, std::size_t i, const VehicleGains& g) {
  const SensorReading in = initial_reading(sc, i);
  const double r = sc.followers[i].spacing;
  const FilterState fs = initial_filter_state(in, r, g);
  InitialControl ic;
  ic.q_hat = sc.followers[i].s0 + g.l * in.a;
  ic.e = in.gap - r;
  ic.u = evaluate_surfaces(in, r, fs, ic.q_hat, g).u;
  return ic;
}

double e1_for(const Scenario& sc, std::size_t i, const VehicleGains& g, const InitialControl& ic) {
  const FollowerConfig& f = sc.followers[i];
  E1Inputs in;
  in.initial = f.initial;
  in.u0 = ic.u;
  in.q_hat0 = ic.q_hat;
  in.sigma1 = disturbance(0.0, f.disturbance).sigma1_bound;
  in.tau_true = f.params.tau;
  return compute_e1_bar(in, sc.bounds, g.b_hat, f.params.g);
}

}  // namespace

BWindow compute_b_window(const ModelBounds& bounds) {
  bounds.validate();
  BWindow w;
  w.b_hi = 1.0 / (bounds.m.lo * bounds.tau.lo);
  w.b_lo = 1.0 / (bounds.m.hi * bounds.tau.hi);
  w.lower = std::max(w.b_lo, w.b_hi / 2.0);
  w.lower_inclusive = w.b_lo > w.b_hi / 2.0;
  w.upper = w.b_hi;
  return w;
}

double compute_cb_bar(double b_lo, double b_hi, double b_hat) {
  if (!(b_hat > 0.0)) throw std::invalid_argument("b_hat must be positive");
  return std::max((b_hi - b_hat) / b_hat, (b_hat - b_lo) / b_hat);
}

double compute_e1_bar(const E1Inputs& in, const ModelBounds& b, double b_hat, double g) {
  const double b_hi = 1.0 / (b.m.lo * b.tau.lo);
  const double b_lo = 1.0 / (b.m.hi * b.tau.hi);
  return std::abs(in.initial.a) / in.tau_true +
         b.c.hi * sq(in.initial.v) / (b.m.lo * b.tau.lo) + g * b.mu.hi / b.tau.lo +
         std::max(b_hi - b_hat, b_hat - b_lo) * std::abs(in.u0) + in.sigma1 +
         std::abs(in.q_hat0);
}

double alpha3(const VehicleGains& g, double a_bar_prev, double delta) {
  return a_bar_prev / g.h1 + (2.0 * g.k1 + sq(g.k1) / g.h1) * delta;
}

double alpha4(const VehicleGains& g, double a3, double delta) {
  const double h1 = g.h1;
  const double h1_3 = h1 * h1 * h1;
  return ((g.k1 * sq(h1) + g.k2 * sq(h1) + std::abs(h1 / sq(g.kappa1) - h1_3) +
           std::abs(h1 * sq(g.k2) - h1_3)) /
              g.h2 +
          a3 / g.kappa1 + 2.0 * g.k2) *
         delta;
}

double a_bar(const VehicleGains& g, double delta) {
  return (2.0 * g.h2 + g.h1 * g.k2 + sq(g.h1) + g.h1 / g.kappa1) * delta;
}

std::vector<ChainEntry> propagate_chain(const GainSet& gains, double v_bar0, double a_bar0) {
  std::vector<ChainEntry> out;
  double v_prev = v_bar0;
  double a_prev = a_bar0;
  for (const auto& g : gains.vehicles) {
    ChainEntry c;
    c.v_bar = (2.0 * g.h1 + g.k1) * gains.delta + v_prev;
    c.a_bar = a_bar(g, gains.delta);
    c.alpha3 = alpha3(g, a_prev, gains.delta);
    c.alpha4 = alpha4(g, c.alpha3, gains.delta);
    out.push_back(c);
    v_prev = c.v_bar;
    a_prev = c.a_bar;
  }
  return out;
}

Condition make_condition(std::string name, Relation rel, double actual, double required) {
  Condition c;
  c.name = std::move(name);
  c.relation = rel;
  c.actual = actual;
  c.required = required;
  const double slack = (rel == Relation::LessEq || rel == Relation::Less) ? required - actual
                                                                          : actual - required;
  c.margin = required != 0.0 && std::isfinite(required) ? slack / std::abs(required) : slack;
  switch (rel) {
    case Relation::LessEq: c.pass = actual <= required; break;
    case Relation::Less: c.pass = actual < required; break;
    case Relation::GreaterEq: c.pass = actual >= required; break;
    case Relation::Greater: c.pass = actual > required; break;
  }
  return c;
}

C1Result check_c1(double v_d0, double a0, const VehicleGains& g, double delta) {
  C1Result r;
  r.lhs = sq(v_d0) / sq(g.h1) + sq(a0 - g.k2 * v_d0) / sq(g.h2);
  r.bound = sq(delta);
  r.pass = r.lhs <= r.bound;
  return r;
}

GainBounds gain_bounds(const VehicleGains& g, double eps, double e1, double a3, double a4) {
  const double xi = g.xi;
  const double e2 = sq(eps);
  GainBounds b;
  b.k1_min = (3.0 * xi + e2) / (2.0 * e2);
  b.k2_min = b.k1_min;
  b.k3_min = (3.0 * sq(xi) * sq(g.h2) + sq(e1) * e2) / (2.0 * sq(g.h2) * e2 * xi);
  b.kappa1_max = 2.0 * xi * e2 / (3.0 * sq(xi) + xi * e2 * sq(g.h1) + e2 * sq(a3));
  b.kappa2_max = 2.0 * xi * e2 * sq(g.h1) /
                 (3.0 * sq(xi) * sq(g.h1) + xi * e2 * sq(g.h2) + sq(g.h1) * e2 * sq(a4));
  return b;
}

std::vector<Condition> check_c2_c3(const VehicleGains& g, double eps, double e1, double a3,
                                   double a4, const std::string& prefix) {
  const GainBounds b = gain_bounds(g, eps, e1, a3, a4);
  return {make_condition(prefix + "C2.k1", Relation::GreaterEq, g.k1, b.k1_min),
          make_condition(prefix + "C2.k2", Relation::GreaterEq, g.k2, b.k2_min),
          make_condition(prefix + "C2.k3", Relation::GreaterEq, g.k3, b.k3_min),
          make_condition(prefix + "C3.kappa1", Relation::LessEq, g.kappa1, b.kappa1_max),
          make_condition(prefix + "C3.kappa2", Relation::LessEq, g.kappa2, b.kappa2_max)};
}

CConstants compute_c_constants(const VehicleGains& g, const CInputs& in, const ModelBounds& b) {
  const double m_lo = b.m.lo;
  const double t_lo = b.tau.lo;
  const double c_hi = b.c.hi;
  const double h1 = g.h1;
  const double h2 = g.h2;
  const double drag = 1.0 / t_lo + 2.0 * c_hi * in.v_bar / m_lo;
  const double bracket = (sq(h2) + (g.k2 + g.k3) * sq(h2) / h1 +
                          std::abs(sq(g.k3) - sq(h2) / sq(h1)) +
                          std::abs(sq(h2) / sq(h1) - 1.0 / sq(g.kappa2))) *
                             in.delta +
                         in.alpha4 / g.kappa2;
  CConstants c;
  c.c1 = drag * (g.k3 + h2 / h1 + 1.0 / g.kappa2) * h2 * in.delta +
         2.0 * c_hi * in.v_bar * in.a_bar / (m_lo * t_lo) + 2.0 * c_hi * sq(in.a_bar) / m_lo +
         in.sigma2 + in.cb_bar * bracket;
  c.c2 = drag + in.cb_bar * g.k3;
  return c;
}

ObserverRequirements observer_requirements(double c1, double c2, double cb, double e1,
                                           double b_hat, double l) {
  if (!(cb < 1.0)) throw std::domain_error("b_hat outside its admissible window (cb_bar >= 1)");
  ObserverRequirements r;
  r.l_min = (c1 + c2 * e1) / ((1.0 - cb) * e1);
  r.M = (e1 * (l - c2 - cb * l) - c1) / (l * b_hat * (1.0 + cb));
  return r;
}

ZenoBound zeno_bound(const VehicleGains& g, double e1, double a4, double delta, double M) {
  const double h1 = g.h1;
  const double h2 = g.h2;
  ZenoBound z;
  z.B = h2 *
        ((g.l + g.k3) * e1 / h2 +
         (h2 + (g.k2 + g.k3) * h2 / h1 + std::abs(sq(g.k3) - sq(h2) / sq(h1)) +
          std::abs(sq(h2) / sq(h1) - 1.0 / sq(g.kappa2))) *
             delta +
         a4 / g.kappa2) /
        g.b_hat;
  z.tau_min = M > 0.0 ? M / (g.l * M + z.B) : 0.0;
  return z;
}

InitialErrorBound admissible_initial_error(double v_d0, double a0, const VehicleGains& g,
                                           double delta) {
  const double h1s = sq(g.h1);
  const double h2s = sq(g.h2);
  const double kk = g.k1 * g.k2 + h1s;
  const double w = a0 - g.k2 * v_d0;
  InitialErrorBound r;
  r.A0 = 1.0 + sq(g.k1) / h1s + sq(kk) / h2s;
  r.B0 = 2.0 * g.k1 * v_d0 / h1s - 2.0 * w * kk / h2s;
  r.C0 = sq(v_d0) / h1s + sq(w) / h2s - sq(delta);
  if (r.C0 > 0.0) return r;
  // C0 <= 0: real roots of opposite sign (or one at zero); the smaller magnitude bounds |e(0)|.
  const double disc = std::sqrt(sq(r.B0) - 4.0 * r.A0 * r.C0);
  const double x1 = (-r.B0 + disc) / (2.0 * r.A0);
  const double x2 = (-r.B0 - disc) / (2.0 * r.A0);
  r.iota = std::min(std::abs(x1), std::abs(x2));
  r.admissible = true;
  return r;
}

double rho(const VehicleGains& g, double e1, double a3, double a4) {
  return std::min({g.k1 - 0.5, g.k2 - 0.5, g.k3 - sq(e1) / (2.0 * sq(g.h2) * g.xi),
                   1.0 / g.kappa1 - sq(g.h1) / 2.0 - sq(a3) / (2.0 * g.xi),
                   1.0 / g.kappa2 - sq(g.h2) / (2.0 * sq(g.h1)) - sq(a4) / (2.0 * g.xi)});
}

bool VerificationReport::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.pass; });
}

std::vector<const Condition*> VerificationReport::failures() const {
  std::vector<const Condition*> out;
  for (const auto& c : conditions) {
    if (!c.pass) out.push_back(&c);
  }
  return out;
}

InitialControl initial_control(const Scenario& sc, std::size_t i) {
  return initial_control_for(sc, i, sc.gains.vehicles.at(i));
}

double threshold_in_use(const VehicleGains& g, const DerivedBounds& d) {
  return g.trigger_threshold ? *g.trigger_threshold : d.M;
}

VerificationReport verify_all(const Scenario& sc) {
  const GainSet& gs = sc.gains;
  const double delta = gs.delta;
  VerificationReport rep;
  const BWindow win = compute_b_window(sc.bounds);
  rep.a_bar_0 = std::max(std::abs(sc.leader_initial.a), sc.leader.u0_bound);
  rep.v_bar_0 = sc.leader.v0_bound;
  const auto chain = propagate_chain(gs, rep.v_bar_0, rep.a_bar_0);

  for (std::size_t i = 0; i < sc.size(); ++i) {
    const VehicleGains& g = gs.vehicles[i];
    const FollowerConfig& f = sc.followers[i];
    const std::string pre = "v" + std::to_string(i + 1) + ".";
    DerivedBounds d;
    d.b_hi = win.b_hi;
    d.b_lo = win.b_lo;
    d.cb_bar = compute_cb_bar(win.b_lo, win.b_hi, g.b_hat);
    rep.conditions.push_back(make_condition(pre + "observer.b_hat_lower",
                                            win.lower_inclusive ? Relation::GreaterEq : Relation::Greater,
                                            g.b_hat, win.lower));
    rep.conditions.push_back(
        make_condition(pre + "observer.b_hat_upper", Relation::LessEq, g.b_hat, win.upper));

    const DisturbanceSample ds = disturbance(0.0, f.disturbance);
    d.sigma1 = ds.sigma1_bound;
    d.sigma2 = ds.sigma2_bound;
    const InitialControl ic = initial_control_for(sc, i, g);
    d.u0 = ic.u;
    d.q_hat0 = ic.q_hat;
    d.e0 = ic.e;
    d.e1_bar = e1_for(sc, i, g, ic);
    d.v_bar = chain[i].v_bar;
    d.a_bar = chain[i].a_bar;
    d.alpha3 = chain[i].alpha3;
    d.alpha4 = chain[i].alpha4;

    const CConstants cc =
        compute_c_constants(g, {d.cb_bar, d.v_bar, d.a_bar, d.alpha4, d.sigma2, delta}, sc.bounds);
    d.c1 = cc.c1;
    d.c2 = cc.c2;
    if (d.cb_bar < 1.0) {
      const ObserverRequirements obs =
          observer_requirements(d.c1, d.c2, d.cb_bar, d.e1_bar, g.b_hat, g.l);
      d.l_min = obs.l_min;
      d.M = obs.M;
    } else {
      d.l_min = kInf;
      d.M = -kInf;
    }
    rep.conditions.push_back(make_condition(pre + "observer.l", Relation::Greater, g.l, d.l_min));
    rep.conditions.push_back(make_condition(pre + "observer.M_positive", Relation::Greater, d.M, 0.0));
    d.M_used = threshold_in_use(g, d);
    if (g.trigger_threshold) {
      rep.conditions.push_back(
          make_condition(pre + "observer.M_used", Relation::LessEq, d.M_used, d.M));
    }

    const ZenoBound z = zeno_bound(g, d.e1_bar, d.alpha4, delta, d.M_used);
    d.B = z.B;
    d.tau_min = z.tau_min;

    const SensorReading in = initial_reading(sc, i);
    const double v_d0 = in.v_prev - in.v;
    const C1Result c1 = check_c1(v_d0, in.a, g, delta);
    rep.conditions.push_back(make_condition(pre + "C1", Relation::LessEq, c1.lhs, c1.bound));
    for (auto& c : check_c2_c3(g, gs.epsilon, d.e1_bar, d.alpha3, d.alpha4, pre)) {
      rep.conditions.push_back(std::move(c));
    }

    const InitialErrorBound ib = admissible_initial_error(v_d0, in.a, g, delta);
    d.iota = ib.admissible ? std::min(ib.iota, delta) : 0.0;
    rep.conditions.push_back(
        make_condition(pre + "initial_error", Relation::LessEq, std::abs(d.e0), d.iota));
    d.rho = rho(g, d.e1_bar, d.alpha3, d.alpha4);
    rep.conditions.push_back(make_condition(pre + "rho", Relation::GreaterEq, d.rho,
                                            3.0 * g.xi / (2.0 * sq(gs.epsilon))));
    rep.vehicles.push_back(d);
  }

  rep.conditions.push_back(
      make_condition("platoon.epsilon", Relation::LessEq, gs.epsilon, delta));
  const auto r = sc.spacings();
  rep.conditions.push_back(make_condition("platoon.delta", Relation::Less, delta,
                                          *std::min_element(r.begin(), r.end())));
  return rep;
}

SuggestResult suggest(const Scenario& sc_in, const SuggestOptions& opt) {
  SuggestResult res;
  Scenario sc = sc_in;
  const double delta = sc.gains.delta;
  const double eps = sc.gains.epsilon;
  const double grow = 1.0 + opt.margin;
  const BWindow win = compute_b_window(sc.bounds);
  const double b_hat = opt.b_hat ? *opt.b_hat : 0.5 * (win.b_lo + win.b_hi);
  if (!win.contains(b_hat)) {
    res.reason = "b_hat outside its admissible window";
    return res;
  }
  const double cb = compute_cb_bar(win.b_lo, win.b_hi, b_hat);

  double v_prev = sc.leader.v0_bound;
  double a_prev = std::max(std::abs(sc.leader_initial.a), sc.leader.u0_bound);
  for (std::size_t i = 0; i < sc.size(); ++i) {
    VehicleGains& g = sc.gains.vehicles[i];
    const std::string who = "vehicle " + std::to_string(i + 1) + ": ";
    g.b_hat = b_hat;
    g.trigger_threshold.reset();
    const GainBounds kb = gain_bounds(g, eps, 0.0, 0.0, 0.0);
    g.k1 = kb.k1_min * grow;
    g.k2 = kb.k2_min * grow;
    const double sigma2 = disturbance(0.0, sc.followers[i].disturbance).sigma2_bound;

    g.l = 1.0;
    bool l_converged = false;
    double e1 = 0.0;
    ChainEntry ch;
    for (int it = 0; it < opt.max_iterations && !l_converged; ++it) {
      g.k3 = 1.0;
      bool k3_ok = false;
      for (int j = 0; j < opt.max_iterations; ++j) {
        e1 = e1_for(sc, i, g, initial_control_for(sc, i, g));
        const double need = gain_bounds(g, eps, e1, 0.0, 0.0).k3_min;
        if (g.k3 >= need) {
          k3_ok = true;
          break;
        }
        g.k3 = std::max(g.k3, need * grow);
        if (!std::isfinite(g.k3) || g.k3 > 1e15) break;
      }
      if (!k3_ok) {
        res.reason = who + "k3 fixed point diverges";
        return res;
      }
      ch.alpha3 = alpha3(g, a_prev, delta);
      g.kappa1 = gain_bounds(g, eps, e1, ch.alpha3, 0.0).kappa1_max / grow;
      ch.alpha4 = alpha4(g, ch.alpha3, delta);
      g.kappa2 = gain_bounds(g, eps, e1, ch.alpha3, ch.alpha4).kappa2_max / grow;
      ch.a_bar = a_bar(g, delta);
      ch.v_bar = (2.0 * g.h1 + g.k1) * delta + v_prev;
      const CConstants cc = compute_c_constants(
          g, {cb, ch.v_bar, ch.a_bar, ch.alpha4, sigma2, delta}, sc.bounds);
      const double l_min = observer_requirements(cc.c1, cc.c2, cb, e1, b_hat, g.l).l_min;
      const double next_l = l_min * grow;
      if (!std::isfinite(next_l) || next_l > 1e18) {
        res.reason = who + "observer gain diverges";
        return res;
      }
      l_converged = std::abs(next_l - g.l) <= 1e-12 * next_l;
      g.l = next_l;
    }
    if (!l_converged) {
      res.reason = who + "observer gain iteration did not converge";
      return res;
    }
    v_prev = ch.v_bar;
    a_prev = ch.a_bar;
  }

  res.gains = sc.gains;
  res.report = verify_all(sc);
  res.feasible = res.report.all_pass();
  if (!res.feasible) {
    res.reason = "suggested gains fail re-verification:";
    for (const Condition* c : res.report.failures()) res.reason += " " + c->name;
  }
  return res;
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::LessEq: return "<=";
    case Relation::GreaterEq: return ">=";
    case Relation::Less: return "<";
    case Relation::Greater: return ">";
  }
  return "?";
}

std::string format_report(const VerificationReport& rep) {
  std::ostringstream os;
  char buf[512];
  for (const auto& c : rep.conditions) {
    std::snprintf(buf, sizeof buf,
                  "condition=%s relation=%s required=%.10g actual=%.10g margin=%.6g verdict=%s\n",
                  c.name.c_str(), to_string(c.relation).c_str(), c.required, c.actual, c.margin,
                  c.pass ? "pass" : "fail");
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "derived a_bar_0=%.10g v_bar_0=%.10g\n", rep.a_bar_0,
                rep.v_bar_0);
  os << buf;
  for (std::size_t i = 0; i < rep.vehicles.size(); ++i) {
    const DerivedBounds& d = rep.vehicles[i];
    std::snprintf(buf, sizeof buf,
                  "derived vehicle=%zu b_lo=%.10g b_hi=%.10g cb_bar=%.10g e1_bar=%.10g "
                  "v_bar=%.10g a_bar=%.10g alpha3=%.10g alpha4=%.10g c1=%.10g c2=%.10g "
                  "l_min=%.10g M=%.10g M_used=%.10g B=%.10g tau_min=%.10g rho=%.10g iota=%.10g\n",
                  i + 1, d.b_lo, d.b_hi, d.cb_bar, d.e1_bar, d.v_bar, d.a_bar, d.alpha3, d.alpha4,
                  d.c1, d.c2, d.l_min, d.M, d.M_used, d.B, d.tau_min, d.rho, d.iota);
    os << buf;
  }
  const auto fails = rep.failures();
  os << "summary passed=" << rep.conditions.size() - fails.size()
     << " failed=" << fails.size() << " verdict=" << (fails.empty() ? "pass" : "fail") << "\n";
  return os.str();
}

}  // namespace platoon
