#include "platoon/cli.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "platoon/engine.hpp"
#include "platoon/synthesis.hpp"

namespace platoon {
namespace {

struct Overrides {
  std::optional<std::string> controller;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<long> stride;
};

Scenario load(const std::string& path, const Overrides& o) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("--config: cannot open '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ConfigError("--config: YAML parse error in '" + path + "': " + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (o.controller) root["controller"] = *o.controller;
  if (o.dt) root["dt"] = *o.dt;
  if (o.horizon) root["horizon"] = *o.horizon;
  if (o.seed) root["seed"] = *o.seed;
  if (o.stride) root["record_stride"] = *o.stride;
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << root;
  return build_scenario_from_string(em.c_str());
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

}  // namespace

AnalysisInputs analysis_inputs(const Scenario& sc) {
  AnalysisInputs in;
  in.delta = sc.gains.delta;
  in.epsilon = sc.gains.epsilon;
  in.window = sc.terminal_window;
  const VerificationReport rep = verify_all(sc);
  for (const DerivedBounds& d : rep.vehicles) {
    in.e1_bar.push_back(d.e1_bar);
    in.tau_min.push_back(d.tau_min);
  }
  return in;
}

TraceMeta make_meta(const Scenario& sc, const SimTrace& tr) {
  TraceMeta m;
  m.name = sc.name;
  m.seed = sc.seed;
  m.controller = tr.controller;
  m.n_vehicles = tr.n_vehicles;
  m.dt = tr.dt;
  m.steps = tr.steps;
  m.record_stride = sc.record_stride;
  m.analysis = analysis_inputs(sc);
  m.thresholds = tr.thresholds;
  return m;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Platoon simulation, verification and analysis"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::string trace_path;
  Overrides ov;
  std::string controller;
  double dt = 0, horizon = 0;
  std::uint64_t seed = 0;
  long stride = 0;
  bool strict = false;
  double margin = 0.05;
  double b_hat = 0;

  auto* sim = app.add_subcommand("simulate", "Run one closed-loop simulation and export the trace");
  sim->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("--controller", controller, "dsc or baseline")->check(CLI::IsMember({"dsc", "baseline"}));
  sim->add_option("--dt", dt, "Step size, s")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", horizon, "Simulated time, s")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--stride", stride, "Record every n-th step")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_flag("--strict", strict, "Exit 1 when any verdict fails");

  auto* ver = app.add_subcommand("verify", "Check the gain set against the stability conditions");
  ver->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);

  auto* sug = app.add_subcommand("suggest", "Propose gains that satisfy every condition");
  sug->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  sug->add_option("--margin", margin, "Relative margin on each bound")->check(CLI::PositiveNumber);
  sug->add_option("--b-hat", b_hat, "Nominal control gain")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "Run the designed and baseline controllers side by side");
  cmp->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--dt", dt, "Step size, s")->check(CLI::PositiveNumber);
  cmp->add_option("--horizon", horizon, "Simulated time, s")->check(CLI::NonNegativeNumber);
  cmp->add_option("--seed", seed, "Random seed");
  cmp->add_option("--stride", stride, "Record every n-th step")->check(CLI::PositiveNumber);
  cmp->add_option("--out", out_dir, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Recompute verdicts from a saved trace");
  rep->add_option("--trace", trace_path, "trace.csv written by simulate")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  for (auto* sc : {sim, cmp}) {
    if (!sc->parsed()) continue;
    auto given = [sc](const char* name) {
      const CLI::Option* o = sc->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };
    if (given("--controller")) ov.controller = controller;
    if (given("--dt")) ov.dt = dt;
    if (given("--horizon")) ov.horizon = horizon;
    if (given("--seed")) ov.seed = seed;
    if (given("--stride")) ov.stride = stride;
  }

  try {
    if (sim->parsed()) {
      const Scenario sc = load(config, ov);
      const SimTrace tr = run(sc);
      const TraceMeta meta = make_meta(sc, tr);
      export_run(tr, meta, out_dir);
      const StabilityReport r = analyze(tr, meta.analysis);
      out << format_stability(r);
      return strict && !r.all_pass() ? 1 : 0;
    }
    if (ver->parsed()) {
      const VerificationReport r = verify_all(load(config, ov));
      out << format_report(r);
      return r.all_pass() ? 0 : 1;
    }
    if (sug->parsed()) {
      const Scenario sc = load(config, ov);
      SuggestOptions opt;
      opt.margin = margin;
      if (sug->count("--b-hat")) opt.b_hat = b_hat;
      const SuggestResult r = suggest(sc, opt);
      if (!r.feasible) {
        out << "suggest infeasible: " << r.reason << "\n";
        return 1;
      }
      for (std::size_t i = 0; i < r.gains.vehicles.size(); ++i) {
        const VehicleGains& g = r.gains.vehicles[i];
        out << "gains vehicle=" << i + 1 << " k1=" << fmt(g.k1) << " k2=" << fmt(g.k2) << " k3=" << fmt(g.k3)
            << " kappa1=" << fmt(g.kappa1) << " kappa2=" << fmt(g.kappa2) << " l=" << fmt(g.l)
            << " b_hat=" << fmt(g.b_hat) << " M=" << fmt(r.report.vehicles[i].M) << "\n";
      }
      out << format_report(r.report);
      return 0;
    }
    if (cmp->parsed()) {
      Overrides o = ov;
      o.controller = "dsc";
      const Scenario s_dsc = load(config, o);
      o.controller = "baseline";
      const Scenario s_base = load(config, o);
      const SimTrace t_dsc = run(s_dsc);
      const SimTrace t_base = run(s_base);
      namespace fs = std::filesystem;
      const TraceMeta m_dsc = make_meta(s_dsc, t_dsc);
      export_run(t_dsc, m_dsc, (fs::path(out_dir) / "dsc").string());
      export_run(t_base, make_meta(s_base, t_base), (fs::path(out_dir) / "baseline").string());
      const auto pd = string_stability_verdict(t_dsc, m_dsc.analysis.delta).sup_e;
      const auto pb = string_stability_verdict(t_base, m_dsc.analysis.delta).sup_e;
      std::ostringstream table;
      table << "vehicle,peak_e_dsc,peak_e_baseline,baseline_larger\n";
      long larger = 0;
      for (std::size_t i = 0; i < pd.size(); ++i) {
        const bool big = pb[i] > pd[i];
        larger += big;
        table << i + 1 << "," << fmt(pd[i]) << "," << fmt(pb[i]) << "," << (big ? "yes" : "no") << "\n";
      }
      std::ofstream f((fs::path(out_dir) / "compare.csv").string());
      if (!f) throw std::runtime_error("cannot write '" + (fs::path(out_dir) / "compare.csv").string() + "'");
      f << table.str();
      out << table.str() << "summary baseline_larger=" << larger << "/" << pd.size() << "\n";
      return 0;
    }
    if (rep->parsed()) {
      const LoadedRun lr = load_run(trace_path);
      out << format_stability(analyze(lr.trace, lr.meta.analysis));
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace platoon
