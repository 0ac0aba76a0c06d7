#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gripkit/analysis.hpp"

namespace gripkit {

struct AnalysisOptions {
  TableOptions table;
  AnovaOptions anova;
  AverageOptions average;
};

struct AnalysisReport {
  std::vector<std::string> session_ids;
  DeltaPsTable table;
  AnovaResult anova;
  ComparisonResult comparisons;
  std::vector<AverageTrace> averages;
  std::vector<std::pair<std::string, SideSplitResult>> side_split;
  std::vector<std::string> warnings;
};

/// Delta_PS table, ANOVA, planned comparisons, traces and side split.
AnalysisReport analyze_sessions(std::span<const SessionRecording> sessions, const AnalysisOptions& options = {});

std::string report_to_json(const AnalysisReport& report);

/// Writes `results.json`, `delta_ps.csv`, `condition_averages.csv` and one
/// `plot_<condition>.csv` (x, mean, se) per condition into `dir`.
void write_report(const std::filesystem::path& dir, const AnalysisReport& report);

}  // namespace gripkit
