#pragma once

#include <array>
#include <string_view>

#include "mapnav/jsonio.hpp"

namespace mapnav::cli {

// Single place that ties each public library operation to the subcommand
// exposing it. The binary prints this under --dispatch-table and the test
// suite walks it, so a new subcommand that is not registered here (or a
// registered one that was dropped from the binary) fails the build gates.
struct DispatchEntry {
  std::string_view operation;
  std::string_view command;
};

inline constexpr std::array<DispatchEntry, 15> dispatch_table{{
    {"validate_floorplan", "map validate"},
    {"build_connectivity", "graph"},
    {"oracle_plan", "oracle"},
    {"classify_task", "classify"},
    {"double_map", "transform double"},
    {"apply_labeling", "transform relabel"},
    {"rasterize", "rasterize"},
    {"render_floorplan", "render"},
    {"build_prompt", "prompt"},
    {"query", "query"},
    {"validate_plan", "validate-plan"},
    {"execute_plan", "simulate"},
    {"run_experiment", "bench run"},
    {"write_report", "bench report"},
    {"welch_t_test", "stats ttest"},
}};

inline Json dispatch_table_json() {
  Json j = Json::array();
  for (const DispatchEntry& e : dispatch_table) {
    j.push_back({{"operation", std::string(e.operation)}, {"command", std::string(e.command)}});
  }
  return j;
}

}  // namespace mapnav::cli
