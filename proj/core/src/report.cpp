#include "gripkit/report.hpp"

#include <algorithm>
#include <sstream>

#include "detail/file_util.hpp"
#include "detail/json_util.hpp"
#include "gripkit/csv.hpp"
#include "gripkit/error.hpp"

namespace gripkit {

using detail::Json;

namespace {

Json effect_json(const EffectResult& e) {
  return {{"F", e.f},
          {"df", {e.df_num, e.df_den}},
          {"p", e.p},
          {"ss", e.ss},
          {"ms", e.ms},
          {"error_ss", e.error_ss},
          {"error_ms", e.error_ms},
          {"epsilon", e.epsilon},
          {"degenerate", e.degenerate},
          {"p_below_floor", e.p_below_floor}};
}

std::string file_label(const TrialCondition& c) {
  std::string s = format_fixed(c.target_force_n, 1) + "N_" + format_fixed(c.displacement_mm, 1) + "mm";
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

AnalysisReport analyze_sessions(std::span<const SessionRecording> sessions, const AnalysisOptions& options) {
  if (sessions.empty()) throw Error(ErrorCategory::NoSessions, "no sessions found");
  AnalysisReport r;
  for (const auto& s : sessions) r.session_ids.push_back(s.session_id);
  r.table = build_delta_ps_table(sessions, options.table);
  r.warnings = r.table.warnings;
  r.anova = rm_anova_2way(r.table, options.anova);
  r.comparisons = holm_planned_comparisons(r.table, r.anova);
  r.averages = condition_average(sessions, options.average);
  for (const auto& s : sessions) {
    r.side_split.emplace_back(s.participant.empty() ? s.session_id : s.participant,
                              stable_phase_side_split(s, 1.0, options.table.include_training));
  }
  return r;
}

std::string report_to_json(const AnalysisReport& r) {
  Json conditions = Json::array();
  for (const auto& c : all_conditions()) conditions.push_back(condition_label(c));

  Json subjects = Json::array();
  for (std::size_t s = 0; s < r.table.n_subjects(); ++s) {
    Json rows = Json::array();
    for (const auto& row : r.table.values[s]) {
      Json cells = Json::array();
      for (const auto& c : row) cells.push_back(c ? Json(*c) : Json(nullptr));
      rows.push_back(cells);
    }
    subjects.push_back({{"id", r.table.subjects[s]}, {"values", rows}});
  }

  Json pairs = Json::array();
  for (const auto& p : r.comparisons.pairs) {
    pairs.push_back({{"label", p.label},
                     {"target_force_n", kTargetForcesN[p.target_level]},
                     {"low_mm", kDisplacementsMm[p.low_level]},
                     {"high_mm", kDisplacementsMm[p.high_level]},
                     {"delta_n", p.delta_n},
                     {"t", p.t},
                     {"df", p.df},
                     {"p_raw", p.p_raw},
                     {"p_holm", p.p_holm}});
  }

  Json averages = Json::array();
  for (const auto& a : r.averages) {
    averages.push_back({{"condition", a.label},
                        {"n_subjects", a.n_subjects},
                        {"samples", a.t_s.size()},
                        {"warnings", a.warnings}});
  }

  Json side = Json::array();
  for (const auto& [id, split] : r.side_split) {
    Json per = Json::array();
    for (const auto& p : split.per_target) {
      per.push_back({{"target_force_n", p.target_force_n},
                     {"finger_mean_n", p.finger_mean_n},
                     {"thumb_mean_n", p.thumb_mean_n},
                     {"trials", p.trials}});
    }
    side.push_back({{"subject", id}, {"per_target", per}, {"warnings", split.warnings}});
  }

  const Json doc = {
      {"format_version", 1},
      {"sessions", r.session_ids},
      {"n_subjects", r.anova.n_subjects},
      {"delta_ps", {{"unit", "N"}, {"layout", "target x displacement"}, {"conditions", conditions},
                    {"subjects", subjects}}},
      {"anova",
       {{"target", effect_json(r.anova.target)},
        {"displacement", effect_json(r.anova.displacement)},
        {"interaction", effect_json(r.anova.interaction)},
        {"ss_total", r.anova.ss_total},
        {"ss_subject", r.anova.ss_subject},
        {"sphericity_corrected", r.anova.sphericity_corrected},
        {"degenerate", r.anova.degenerate()}}},
      {"comparisons",
       {{"ms_pool", r.comparisons.ms_pool},
        {"df_pool", r.comparisons.df_pool},
        {"degenerate", r.comparisons.degenerate},
        {"correction", "holm"},
        {"pairs", pairs}}},
      {"averages", averages},
      {"side_split", side},
      {"warnings", r.warnings},
  };
  return doc.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const AnalysisReport& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create " + dir.string() + ": " + ec.message());
  detail::write_file_atomic(dir / "results.json", report_to_json(r));

  std::ostringstream table;
  table << "subject";
  for (const auto& c : all_conditions()) table << ',' << file_label(c);
  table << '\n';
  for (std::size_t s = 0; s < r.table.n_subjects(); ++s) {
    table << r.table.subjects[s];
    for (const auto& row : r.table.values[s])
      for (const auto& c : row) table << ',' << (c ? format_roundtrip(*c) : "");
    table << '\n';
  }
  detail::write_file_atomic(dir / "delta_ps.csv", table.str());

  std::ostringstream avg;
  avg << "condition,t_s,mean_N,se_N,n_subjects\n";
  for (std::size_t c = 0; c < r.averages.size(); ++c) {
    const auto& a = r.averages[c];
    std::ostringstream plot;
    plot << "x,mean,se\n";
    for (std::size_t k = 0; k < a.t_s.size(); ++k) {
      avg << a.label << ',' << format_fixed(a.t_s[k], 3) << ',' << format_roundtrip(a.mean[k]) << ','
          << format_roundtrip(a.se[k]) << ',' << a.n_subjects << '\n';
      plot << format_fixed(a.t_s[k], 3) << ',' << format_roundtrip(a.mean[k]) << ',' << format_roundtrip(a.se[k])
           << '\n';
    }
    detail::write_file_atomic(dir / ("plot_" + file_label(all_conditions()[c]) + ".csv"), plot.str());
  }
  detail::write_file_atomic(dir / "condition_averages.csv", avg.str());
}

}  // namespace gripkit
