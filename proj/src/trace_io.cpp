#include "platoon/trace_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace platoon {
namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return in;
}

void put(std::string& line, double x, int digits = 9) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  line.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_num(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error(where + ": not a number '" + s + "'");
  return x;
}

double VehicleSignals::*const kMembers[] = {
    &VehicleSignals::p,    &VehicleSignals::v,     &VehicleSignals::a,     &VehicleSignals::e,
    &VehicleSignals::u,    &VehicleSignals::q,     &VehicleSignals::q_hat, &VehicleSignals::e1,
    &VehicleSignals::psi,  &VehicleSignals::z1,    &VehicleSignals::z2,    &VehicleSignals::eta1,
    &VehicleSignals::eta2, &VehicleSignals::gamma, &VehicleSignals::V};

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string chart_svg(const SimTrace& tr, std::size_t i, double delta) {
  const double W = 640, H = 380, L = 70, R = 20, T = 40, B = 55;
  const std::size_t rows = tr.rows();
  const double t0 = rows ? tr.t.front() : 0.0;
  const double t1 = rows > 1 ? tr.t.back() : t0 + 1.0;
  double lo = 0.0, hi = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    lo = std::min(lo, tr.at(r, i).e);
    hi = std::max(hi, tr.at(r, i).e);
  }
  const double pad = std::max(0.1 * (hi - lo), 1e-3);
  lo -= pad;
  hi += pad;
  auto X = [&](double t) { return L + (t - t0) / (t1 - t0) * (W - L - R); };
  auto Y = [&](double e) { return T + (hi - e) / (hi - lo) * (H - T - B); };

  // Min/max envelope per pixel column keeps peaks visible after thinning.
  const std::size_t buckets = 1000;
  std::vector<std::size_t> keep;
  if (rows <= 2 * buckets) {
    for (std::size_t r = 0; r < rows; ++r) keep.push_back(r);
  } else {
    for (std::size_t b = 0; b < buckets; ++b) {
      const std::size_t r0 = b * rows / buckets, r1 = (b + 1) * rows / buckets;
      std::size_t rmin = r0, rmax = r0;
      for (std::size_t r = r0; r < r1; ++r) {
        if (tr.at(r, i).e < tr.at(rmin, i).e) rmin = r;
        if (tr.at(r, i).e > tr.at(rmax, i).e) rmax = r;
      }
      keep.push_back(std::min(rmin, rmax));
      if (rmin != rmax) keep.push_back(std::max(rmin, rmax));
    }
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">Spacing error, vehicle "
     << i + 1 << " (delta = " << tick_label(delta) << " m)</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = t0 + (t1 - t0) * k / 5.0;
    const double e = lo + (hi - lo) * k / 5.0;
    os << "<line x1=\"" << X(t) << "\" y1=\"" << H - B << "\" x2=\"" << X(t) << "\" y2=\"" << H - B + 5
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << X(t) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << tick_label(t)
       << "</text>\n";
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << Y(e) << "\" x2=\"" << L << "\" y2=\"" << Y(e)
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << L - 8 << "\" y=\"" << Y(e) + 4 << "\" text-anchor=\"end\">" << tick_label(e)
       << "</text>\n";
  }
  if (lo < 0.0 && hi > 0.0) {
    os << "<line x1=\"" << L << "\" y1=\"" << Y(0) << "\" x2=\"" << W - R << "\" y2=\"" << Y(0)
       << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">Time (s)</text>\n";
  os << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">e_"
     << i + 1 << " (m)</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.2\" points=\"";
  for (std::size_t r : keep) os << X(tr.t[r]) << "," << Y(tr.at(r, i).e) << " ";
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace

const std::vector<std::string>& vehicle_columns() {
  static const std::vector<std::string> cols = {"p",  "v",  "a",    "e",    "u",     "q", "q_hat", "e1",
                                                "psi", "z1", "z2", "eta1", "eta2", "gamma", "V"};
  return cols;
}

std::vector<std::string> trace_header(std::size_t n) {
  std::vector<std::string> h = {"t", "p_0", "v_0", "a_0", "u_0"};
  for (std::size_t i = 1; i <= n; ++i) {
    for (const auto& c : vehicle_columns()) h.push_back(c + "_" + std::to_string(i));
  }
  return h;
}

void write_trace_csv(const SimTrace& tr, const std::string& path) {
  std::ofstream out = open_out(path);
  const auto header = trace_header(tr.n_vehicles);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << "\n";
  std::string line;
  for (std::size_t r = 0; r < tr.rows(); ++r) {
    line.clear();
    // Time and positions keep full precision so gaps recompute exactly.
    put(line, tr.t[r], 17);
    line += ',';
    put(line, tr.leader[r].p, 17);
    for (double x : {tr.leader[r].v, tr.leader[r].a, tr.u0[r]}) {
      line += ',';
      put(line, x);
    }
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      const VehicleSignals& s = tr.at(r, i);
      for (auto m : kMembers) {
        line += ',';
        put(line, s.*m, m == &VehicleSignals::p ? 17 : 9);
      }
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_events_csv(const std::vector<Event>& events, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "vehicle,t\n";
  char buf[64];
  for (const Event& e : events) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e.vehicle + 1, e.t);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_meta(const TraceMeta& m, const std::string& path) {
  YAML::Emitter y;
  y.SetDoublePrecision(17);
  y << YAML::BeginMap;
  y << YAML::Key << "name" << YAML::Value << m.name;
  y << YAML::Key << "seed" << YAML::Value << m.seed;
  y << YAML::Key << "controller" << YAML::Value << to_string(m.controller);
  y << YAML::Key << "n_vehicles" << YAML::Value << m.n_vehicles;
  y << YAML::Key << "dt" << YAML::Value << m.dt;
  y << YAML::Key << "steps" << YAML::Value << m.steps;
  y << YAML::Key << "record_stride" << YAML::Value << m.record_stride;
  y << YAML::Key << "delta" << YAML::Value << m.analysis.delta;
  y << YAML::Key << "epsilon" << YAML::Value << m.analysis.epsilon;
  y << YAML::Key << "window" << YAML::Value << m.analysis.window;
  y << YAML::Key << "e1_bar" << YAML::Value << YAML::Flow << m.analysis.e1_bar;
  y << YAML::Key << "tau_min" << YAML::Value << YAML::Flow << m.analysis.tau_min;
  y << YAML::Key << "thresholds" << YAML::Value << YAML::Flow << m.thresholds;
  y << YAML::EndMap;
  std::ofstream out = open_out(path);
  out << y.c_str() << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<std::string> write_error_charts(const SimTrace& tr, const std::string& dir, double delta) {
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
    const std::string p = (fs::path(dir) / ("error_" + std::to_string(i + 1) + ".svg")).string();
    std::ofstream out = open_out(p);
    out << chart_svg(tr, i, delta);
    if (!out) throw std::runtime_error("write failed for '" + p + "'");
    paths.push_back(p);
  }
  return paths;
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  const auto header = split(line, ',');
  const std::size_t per = vehicle_columns().size();
  if (header.size() < 5 || (header.size() - 5) % per != 0) {
    throw std::runtime_error(path + ": unexpected column count");
  }
  SimTrace tr;
  tr.n_vehicles = (header.size() - 5) / per;
  if (header != trace_header(tr.n_vehicles)) throw std::runtime_error(path + ": unexpected header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != header.size()) throw std::runtime_error(where + ": wrong field count");
    tr.t.push_back(parse_num(f[0], where));
    tr.leader.push_back({parse_num(f[1], where), parse_num(f[2], where), parse_num(f[3], where)});
    tr.u0.push_back(parse_num(f[4], where));
    std::size_t k = 5;
    for (std::size_t i = 0; i < tr.n_vehicles; ++i) {
      VehicleSignals s;
      for (auto m : kMembers) s.*m = parse_num(f[k++], where);
      tr.signals.push_back(s);
    }
  }
  return tr;
}

std::vector<Event> read_events_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  std::vector<Event> ev;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 2) throw std::runtime_error(path + ": malformed event line '" + line + "'");
    const double v = parse_num(f[0], path);
    if (v < 1) throw std::runtime_error(path + ": vehicle index must be >= 1");
    ev.push_back({static_cast<std::size_t>(v) - 1, parse_num(f[1], path)});
  }
  return ev;
}

TraceMeta read_meta(const std::string& path) {
  YAML::Node n;
  try {
    n = YAML::LoadFile(path);
    TraceMeta m;
    m.name = n["name"].as<std::string>("");
    m.seed = n["seed"].as<std::uint64_t>(0);
    m.controller = parse_controller(n["controller"].as<std::string>());
    m.n_vehicles = n["n_vehicles"].as<std::size_t>();
    m.dt = n["dt"].as<double>();
    m.steps = n["steps"].as<long>();
    m.record_stride = n["record_stride"].as<long>(1);
    m.analysis.delta = n["delta"].as<double>();
    m.analysis.epsilon = n["epsilon"].as<double>();
    m.analysis.window = n["window"].as<double>();
    m.analysis.e1_bar = n["e1_bar"].as<std::vector<double>>();
    m.analysis.tau_min = n["tau_min"].as<std::vector<double>>();
    m.thresholds = n["thresholds"].as<std::vector<double>>();
    return m;
  } catch (const YAML::Exception& e) {
    throw std::runtime_error(path + ": invalid run metadata: " + e.what());
  }
}

void export_run(const SimTrace& tr, const TraceMeta& meta, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
  write_trace_csv(tr, (fs::path(dir) / "trace.csv").string());
  write_events_csv(tr.events, (fs::path(dir) / "events.csv").string());
  write_meta(meta, (fs::path(dir) / "meta.yaml").string());
  write_error_charts(tr, dir, meta.analysis.delta);
}

LoadedRun load_run(const std::string& trace_path) {
  const fs::path dir = fs::path(trace_path).parent_path();
  LoadedRun run;
  run.trace = read_trace_csv(trace_path);
  run.meta = read_meta((dir / "meta.yaml").string());
  run.trace.events = read_events_csv((dir / "events.csv").string());
  run.trace.controller = run.meta.controller;
  run.trace.dt = run.meta.dt;
  run.trace.steps = run.meta.steps;
  run.trace.thresholds = run.meta.thresholds;
  if (run.trace.n_vehicles != run.meta.n_vehicles) {
    throw std::runtime_error(trace_path + ": vehicle count disagrees with meta.yaml");
  }
  return run;
}

}  // namespace platoon
