#pragma once

#include <iosfwd>

#include "platoon/analysis.hpp"
#include "platoon/scenario.hpp"
#include "platoon/trace_io.hpp"

namespace platoon {

/// Observer bounds and inter-event floors the verdicts compare against.
AnalysisInputs analysis_inputs(const Scenario& sc);

TraceMeta make_meta(const Scenario& sc, const SimTrace& tr);

/// Entry point of the command-line tool. Exit status: 0 success, 1 failed
/// verdict, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace platoon
