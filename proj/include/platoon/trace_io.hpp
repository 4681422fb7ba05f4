#pragma once

#include <string>
#include <vector>

#include "platoon/analysis.hpp"
#include "platoon/engine.hpp"

namespace platoon {

/// Run settings stored beside a trace so verdicts can be recomputed from disk.
struct TraceMeta {
  std::string name;
  std::uint64_t seed = 0;
  ControllerKind controller = ControllerKind::Dsc;
  std::size_t n_vehicles = 0;
  double dt = 0.0;
  long steps = 0;
  long record_stride = 1;
  AnalysisInputs analysis;
  std::vector<double> thresholds;
};

/// Signal names per follower, in column order.
const std::vector<std::string>& vehicle_columns();
std::vector<std::string> trace_header(std::size_t n_vehicles);

void write_trace_csv(const SimTrace& tr, const std::string& path);
void write_events_csv(const std::vector<Event>& events, const std::string& path);
void write_meta(const TraceMeta& meta, const std::string& path);
/// One chart of e_i(t) per follower; returns the written paths.
std::vector<std::string> write_error_charts(const SimTrace& tr, const std::string& dir, double delta);

/// Reads a trace written by write_trace_csv. Event log and metadata are not included.
SimTrace read_trace_csv(const std::string& path);
std::vector<Event> read_events_csv(const std::string& path);
TraceMeta read_meta(const std::string& path);

/// Writes trace.csv, events.csv, meta.yaml and error_<i>.svg into `dir`.
void export_run(const SimTrace& tr, const TraceMeta& meta, const std::string& dir);

/// Loads a trace and the events.csv / meta.yaml stored next to it.
struct LoadedRun {
  SimTrace trace;
  TraceMeta meta;
};
LoadedRun load_run(const std::string& trace_path);

}  // namespace platoon
