#pragma once

#include <iosfwd>

#include "serene/simulator.hpp"

namespace serene {

inline constexpr int kTraceSchemaVersion = 1;

/// Line-delimited JSON: a schema header, then one record per line tagged by
/// "type" (run, detection, phase, mitigation, dispatch, stats).
void write_trace_jsonl(std::ostream& out, const RunTrace& trace, bool include_graph = false);

}  // namespace serene
