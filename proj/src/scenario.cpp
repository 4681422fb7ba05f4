#include "platoon/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace platoon {
namespace {

bool absent(const YAML::Node& n) { return !n || n.IsNull(); }

constexpr double kPi = std::numbers::pi;

struct TableRow {
  double p, v, a;
};

constexpr TableRow kTable1[] = {{71.0, 10.0, 0.0},   {63.5, 11.0, 1.5}, {54.0, 11.5, -1.0},
                                {47.2, 12.5, 0.0},   {38.4, 12.5, -2.0}, {30.6, 11.5, 1.0},
                                {22.1, 13.5, 0.0},   {14.8, 13.0, -1.0}};

struct LambdaRanges {
  Interval lam1{1.0, 20.0};
  Interval lam2{0.1, 0.5};
  Interval lam3{0.5, 1.0};
  Interval lam4{4.0, 8.0};
};

double as_double(const YAML::Node& n, const std::string& field) {
  try {
    const double x = n.as<double>();
    if (!std::isfinite(x)) throw ConfigError(field + ": value must be finite");
    return x;
  } catch (const YAML::Exception&) {
    throw ConfigError(field + ": expected a number");
  }
}

std::string as_string(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<std::string>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field + ": expected a string");
  }
}

void read_double(const YAML::Node& parent, const char* key, const std::string& prefix,
                 double& out) {
  if (const YAML::Node n = parent[key]) out = as_double(n, prefix + key);
}

Interval read_interval(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(field + ": expected [lo, hi]");
  Interval iv{as_double(n[0], field + "[0]"), as_double(n[1], field + "[1]")};
  if (!(iv.lo <= iv.hi)) throw ConfigError(field + ": lower end exceeds upper end");
  return iv;
}

KinematicState read_state(const YAML::Node& n, const std::string& field) {
  if (!n.IsMap()) throw ConfigError(field + ": expected {p, v, a}");
  KinematicState s;
  read_double(n, "p", field + ".", s.p);
  read_double(n, "v", field + ".", s.v);
  read_double(n, "a", field + ".", s.a);
  return s;
}

// Scalar broadcast to every vehicle, or one entry per vehicle.
std::vector<double> read_per_vehicle(const YAML::Node& n, std::size_t count,
                                     const std::string& field) {
  if (n.IsSequence()) {
    if (n.size() != count) {
      throw ConfigError(field + ": expected " + std::to_string(count) + " entries, got " +
                        std::to_string(n.size()));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(as_double(n[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  return std::vector<double>(count, as_double(n, field));
}

LeaderProfile read_profile(const YAML::Node& n) {
  if (n.IsScalar()) {
    if (as_string(n, "leader.maneuver") == "default") return leader_maneuver_default();
    if (as_string(n, "leader.maneuver") == "none") return {};
    throw ConfigError("leader.maneuver: expected 'default', 'none' or a list of segments");
  }
  if (!n.IsSequence()) throw ConfigError("leader.maneuver: expected a list of segments");
  LeaderProfile prof;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string f = "leader.maneuver[" + std::to_string(i) + "]";
    const YAML::Node s = n[i];
    LeaderSegment seg;
    if (!s["start"] || !s["end"]) throw ConfigError(f + ": start and end are required");
    seg.t_start = as_double(s["start"], f + ".start");
    seg.t_end = as_double(s["end"], f + ".end");
    read_double(s, "magnitude", f + ".", seg.magnitude);
    const std::string shape = s["shape"] ? as_string(s["shape"], f + ".shape") : "constant";
    if (shape == "constant") {
      seg.shape = LeaderSegment::Shape::Constant;
    } else if (shape == "raised_cosine") {
      seg.shape = LeaderSegment::Shape::RaisedCosine;
    } else {
      throw ConfigError(f + ".shape: unknown shape '" + shape + "'");
    }
    prof.segments.push_back(seg);
  }
  return prof;
}

VehicleParams draw_params(UniformDraw& draw, const ModelBounds& b) {
  VehicleParams p;
  p.m = draw(b.m.lo, b.m.hi);
  p.c = draw(b.c.lo, b.c.hi);
  p.mu = draw(b.mu.lo, b.mu.hi);
  p.tau = draw(b.tau.lo, b.tau.hi);
  return p;
}

DisturbanceParams draw_disturbance(UniformDraw& draw, const LambdaRanges& r) {
  DisturbanceParams d;
  d.lam1 = draw(r.lam1.lo, r.lam1.hi);
  d.lam2 = draw(r.lam2.lo, r.lam2.hi);
  d.lam3 = draw(r.lam3.lo, r.lam3.hi);
  d.lam4 = draw(r.lam4.lo, r.lam4.hi);
  return d;
}

void apply_gain_key(const YAML::Node& g, const char* key, std::size_t n,
                    std::vector<VehicleGains>& vehicles, double VehicleGains::*member) {
  if (const YAML::Node node = g[key]) {
    const auto vals = read_per_vehicle(node, n, std::string("gains.") + key);
    for (std::size_t i = 0; i < n; ++i) vehicles[i].*member = vals[i];
  }
}

Scenario parse(const YAML::Node& root) {
  if (root && !root.IsNull() && !root.IsMap()) throw ConfigError("config: expected a mapping");
  Scenario sc = default_scenario();
  if (!root || root.IsNull()) return sc;

  if (root["name"]) sc.name = as_string(root["name"], "name");
  if (root["seed"]) {
    const double s = as_double(root["seed"], "seed");
    if (s < 0 || s != std::floor(s)) throw ConfigError("seed: expected a non-negative integer");
    sc.seed = static_cast<std::uint64_t>(s);
  }
  read_double(root, "dt", "", sc.dt);
  read_double(root, "horizon", "", sc.horizon);
  read_double(root, "terminal_window", "", sc.terminal_window);
  if (root["record_stride"]) {
    const double s = as_double(root["record_stride"], "record_stride");
    if (s < 1 || s != std::floor(s)) throw ConfigError("record_stride: expected an integer >= 1");
    sc.record_stride = static_cast<long>(s);
  }
  if (root["controller"]) sc.controller = parse_controller(as_string(root["controller"], "controller"));
  if (root["trigger_location"]) {
    const std::string s = as_string(root["trigger_location"], "trigger_location");
    if (s == "exact") {
      sc.trigger_location = TriggerLocation::Exact;
    } else if (s == "step") {
      sc.trigger_location = TriggerLocation::Step;
    } else {
      throw ConfigError("trigger_location: expected 'exact' or 'step'");
    }
  }

  bool v0_auto = true;
  if (const YAML::Node L = root["leader"]) {
    read_double(L, "tau0", "leader.", sc.leader.tau0);
    if (L["initial"]) sc.leader_initial = read_state(L["initial"], "leader.initial");
    if (L["maneuver"]) sc.profile = read_profile(L["maneuver"]);
    if (L["v0_bound"] && !(L["v0_bound"].IsScalar() && L["v0_bound"].Scalar() == "auto")) {
      sc.leader.v0_bound = as_double(L["v0_bound"], "leader.v0_bound");
      v0_auto = false;
    }
  }

  if (const YAML::Node B = root["bounds"]) {
    if (B["m"]) sc.bounds.m = read_interval(B["m"], "bounds.m");
    if (B["c"]) sc.bounds.c = read_interval(B["c"], "bounds.c");
    if (B["mu"]) sc.bounds.mu = read_interval(B["mu"], "bounds.mu");
    if (B["tau"]) sc.bounds.tau = read_interval(B["tau"], "bounds.tau");
  }

  const YAML::Node F = root["followers"];
  std::size_t n = sc.size();
  if (F && F["count"]) {
    const double c = as_double(F["count"], "followers.count");
    if (c < 1 || c != std::floor(c)) throw ConfigError("followers.count: expected an integer >= 1");
    n = static_cast<std::size_t>(c);
  } else if (F && F["initial"] && F["initial"].IsSequence()) {
    n = F["initial"].size();
  }
  sc.followers.resize(n);

  // Initial states: explicit list, or the reference table (which only covers eight vehicles).
  if (F && F["initial"]) {
    const YAML::Node I = F["initial"];
    if (!I.IsSequence() || I.size() != n) {
      throw ConfigError("followers.initial: expected " + std::to_string(n) + " states");
    }
    for (std::size_t i = 0; i < n; ++i) {
      sc.followers[i].initial = read_state(I[i], "followers.initial[" + std::to_string(i) + "]");
    }
  } else if (n > std::size(kTable1)) {
    throw ConfigError("followers.initial: required when count exceeds 8");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      sc.followers[i].initial = {kTable1[i].p, kTable1[i].v, kTable1[i].a};
    }
  }

  std::vector<double> spacing(n, 8.0);
  if (F && F["spacing"]) spacing = read_per_vehicle(F["spacing"], n, "followers.spacing");
  for (std::size_t i = 0; i < n; ++i) sc.followers[i].spacing = spacing[i];
  if (F && F["observer_initial"]) {
    const auto s0 = read_per_vehicle(F["observer_initial"], n, "followers.observer_initial");
    for (std::size_t i = 0; i < n; ++i) sc.followers[i].s0 = s0[i];
  }

  // Draw order is fixed: all vehicle parameters first, then all disturbances.
  UniformDraw draw(sc.seed);
  const YAML::Node P = F ? F["params"] : YAML::Node();
  if (absent(P) || (P.IsScalar() && P.Scalar() == "random")) {
    sc.bounds.validate();
    for (auto& f : sc.followers) f.params = draw_params(draw, sc.bounds);
  } else if (P.IsSequence() && P.size() == n) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string f = "followers.params[" + std::to_string(i) + "].";
      VehicleParams& vp = sc.followers[i].params;
      for (const char* key : {"m", "c", "mu", "tau"}) {
        if (!P[i][key]) throw ConfigError(f + key + ": required");
      }
      read_double(P[i], "m", f, vp.m);
      read_double(P[i], "c", f, vp.c);
      read_double(P[i], "mu", f, vp.mu);
      read_double(P[i], "tau", f, vp.tau);
    }
  } else {
    throw ConfigError("followers.params: expected 'random' or " + std::to_string(n) + " entries");
  }

  const YAML::Node D = F ? F["disturbance"] : YAML::Node();
  if (absent(D) || D.IsMap()) {
    LambdaRanges ranges;
    const YAML::Node R = absent(D) ? YAML::Node() : D["random"];
    if (!absent(D) && absent(R)) {
      throw ConfigError("followers.disturbance: expected 'random' ranges or a list");
    }
    if (!absent(R)) {
      if (R["lam1"]) ranges.lam1 = read_interval(R["lam1"], "followers.disturbance.random.lam1");
      if (R["lam2"]) ranges.lam2 = read_interval(R["lam2"], "followers.disturbance.random.lam2");
      if (R["lam3"]) ranges.lam3 = read_interval(R["lam3"], "followers.disturbance.random.lam3");
      if (R["lam4"]) ranges.lam4 = read_interval(R["lam4"], "followers.disturbance.random.lam4");
    }
    for (auto& f : sc.followers) f.disturbance = draw_disturbance(draw, ranges);
  } else if (D.IsSequence() && D.size() == n) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string f = "followers.disturbance[" + std::to_string(i) + "].";
      DisturbanceParams& dp = sc.followers[i].disturbance;
      read_double(D[i], "lam1", f, dp.lam1);
      read_double(D[i], "lam2", f, dp.lam2);
      read_double(D[i], "lam3", f, dp.lam3);
      read_double(D[i], "lam4", f, dp.lam4);
    }
  } else {
    throw ConfigError("followers.disturbance: expected random ranges or " + std::to_string(n) +
                      " entries");
  }

  sc.gains.vehicles.assign(n, VehicleGains{});
  if (const YAML::Node G = root["gains"]) {
    read_double(G, "delta", "gains.", sc.gains.delta);
    read_double(G, "epsilon", "gains.", sc.gains.epsilon);
    auto& v = sc.gains.vehicles;
    apply_gain_key(G, "k1", n, v, &VehicleGains::k1);
    apply_gain_key(G, "k2", n, v, &VehicleGains::k2);
    apply_gain_key(G, "k3", n, v, &VehicleGains::k3);
    apply_gain_key(G, "h1", n, v, &VehicleGains::h1);
    apply_gain_key(G, "h2", n, v, &VehicleGains::h2);
    apply_gain_key(G, "kappa1", n, v, &VehicleGains::kappa1);
    apply_gain_key(G, "kappa2", n, v, &VehicleGains::kappa2);
    apply_gain_key(G, "l", n, v, &VehicleGains::l);
    apply_gain_key(G, "b_hat", n, v, &VehicleGains::b_hat);
    apply_gain_key(G, "xi", n, v, &VehicleGains::xi);
    if (const YAML::Node M = G["trigger_threshold"]) {
      if (!(M.IsScalar() && M.Scalar() == "auto")) {
        const auto vals = read_per_vehicle(M, n, "gains.trigger_threshold");
        for (std::size_t i = 0; i < n; ++i) v[i].trigger_threshold = vals[i];
      }
    }
  }

  if (const YAML::Node K = root["baseline"]) {
    read_double(K, "kp", "baseline.", sc.baseline.kp);
    read_double(K, "kv", "baseline.", sc.baseline.kv);
    read_double(K, "ka", "baseline.", sc.baseline.ka);
    read_double(K, "kd", "baseline.", sc.baseline.kd);
  }

  sc.leader.u0_bound = sc.profile.u0_bound();
  if (v0_auto) {
    sc.leader.v0_bound = std::abs(sc.leader_initial.v) +
                         sc.leader.tau0 * std::abs(sc.leader_initial.a) +
                         sc.profile.integral_abs();
  }
  sc.validate();
  return sc;
}

}  // namespace

double UniformDraw::operator()(double lo, double hi) {
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

double LeaderProfile::u0(double t) const {
  double u = 0.0;
  for (const auto& s : segments) {
    if (t < s.t_start || t >= s.t_end) continue;
    if (s.shape == LeaderSegment::Shape::Constant) {
      u += s.magnitude;
    } else {
      const double phase = (t - s.t_start) / (s.t_end - s.t_start);
      u += s.magnitude * 0.5 * (1.0 - std::cos(2.0 * kPi * phase));
    }
  }
  return u;
}

double LeaderProfile::u0_bound() const {
  double b = 0.0;
  for (const auto& s : segments) b = std::max(b, std::abs(s.magnitude));
  return b;
}

double LeaderProfile::integral_abs() const {
  double total = 0.0;
  for (const auto& s : segments) {
    const double len = s.t_end - s.t_start;
    total += std::abs(s.magnitude) * (s.shape == LeaderSegment::Shape::Constant ? len : 0.5 * len);
  }
  return total;
}

bool LeaderProfile::quiescent(double t0, double t1) const {
  for (const auto& s : segments) {
    if (s.magnitude != 0.0 && s.t_start <= t1 && t0 < s.t_end) return false;
  }
  return true;
}

void LeaderProfile::validate() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.t_start >= 0.0) || !(s.t_end > s.t_start)) {
      throw ConfigError("leader.maneuver[" + std::to_string(i) + "]: need 0 <= start < end");
    }
  }
}

LeaderProfile leader_maneuver_default() {
  LeaderProfile p;
  p.segments.push_back({6.0, 9.0, LeaderSegment::Shape::RaisedCosine, 2.0});
  return p;
}

std::vector<double> Scenario::spacings() const {
  std::vector<double> r;
  for (const auto& f : followers) r.push_back(f.spacing);
  return r;
}

void Scenario::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (!(horizon >= 0.0)) throw ConfigError("horizon: must be non-negative");
  if (record_stride < 1) throw ConfigError("record_stride: must be >= 1");
  if (!(terminal_window > 0.0)) throw ConfigError("terminal_window: must be positive");
  if (followers.empty()) throw ConfigError("followers.count: at least one follower required");
  if (gains.vehicles.size() != followers.size()) {
    throw ConfigError("gains: one entry per follower required");
  }
  profile.validate();
  try {
    leader.validate();
    bounds.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  double p_prev = leader_initial.p;
  for (std::size_t i = 0; i < followers.size(); ++i) {
    const auto& f = followers[i];
    const std::string idx = "[" + std::to_string(i) + "]";
    try {
      f.params.validate();
      f.disturbance.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("followers" + idx + ": " + e.what());
    }
    if (!bounds.contains(f.params)) {
      throw ConfigError("followers.params" + idx + ": outside bounds");
    }
    if (!(f.spacing > 0.0)) throw ConfigError("followers.spacing" + idx + ": must be positive");
    if (!(p_prev - f.initial.p > 0.0)) {
      throw ConfigError("followers.initial" + idx + ": initial spacing to predecessor must be positive");
    }
    p_prev = f.initial.p;
  }
  try {
    gains.validate(spacings());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Scenario default_scenario() {
  Scenario sc;
  sc.leader_initial = {80.0, 10.0, 0.0};
  sc.profile = leader_maneuver_default();
  sc.bounds = {{1500.0, 2000.0}, {0.2, 0.4}, {0.02, 0.05}, {0.2, 0.4}};
  UniformDraw draw(sc.seed);
  sc.followers.resize(std::size(kTable1));
  for (std::size_t i = 0; i < sc.followers.size(); ++i) {
    sc.followers[i].initial = {kTable1[i].p, kTable1[i].v, kTable1[i].a};
    sc.followers[i].params = draw_params(draw, sc.bounds);
  }
  for (auto& f : sc.followers) f.disturbance = draw_disturbance(draw, LambdaRanges{});
  sc.gains.vehicles.assign(sc.followers.size(), VehicleGains{});
  sc.leader.u0_bound = sc.profile.u0_bound();
  sc.leader.v0_bound = std::abs(sc.leader_initial.v) +
                       sc.leader.tau0 * std::abs(sc.leader_initial.a) + sc.profile.integral_abs();
  return sc;
}

Scenario build_scenario_from_string(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
  return parse(root);
}

Scenario build_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return build_scenario_from_string(ss.str());
}

std::string to_string(ControllerKind kind) {
  return kind == ControllerKind::Dsc ? "dsc" : "baseline";
}

ControllerKind parse_controller(const std::string& s) {
  if (s == "dsc") return ControllerKind::Dsc;
  if (s == "baseline") return ControllerKind::Baseline;
  throw ConfigError("controller: expected 'dsc' or 'baseline', got '" + s + "'");
}

}  // namespace platoon
