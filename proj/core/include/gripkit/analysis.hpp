#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gripkit/protocol.hpp"

namespace gripkit {

/// Peak-minus-onset change of the mean grip force while the tactor moves.
/// The window is [stimulus onset, stimulus end] from the trial markers.
double delta_ps(const TrialRecord& trial);

/// Per-subject condition means of delta_ps: subjects x target x displacement.
struct DeltaPsTable {
  using Cells = std::array<std::array<std::optional<double>, kDisplacementsMm.size()>, kTargetForcesN.size()>;

  std::vector<std::string> subjects;
  std::vector<Cells> values;
  std::vector<std::string> warnings;

  std::size_t n_subjects() const noexcept { return subjects.size(); }
  bool complete() const noexcept;
  /// Throws IncompleteTable naming the first missing cell.
  void require_complete() const;
  double at(std::size_t subject, std::size_t target, std::size_t displacement) const;

  static DeltaPsTable from_values(std::vector<std::string> subjects,
                                  const std::vector<std::array<std::array<double, 3>, 2>>& values);
};

struct TableOptions {
  bool include_training = false;
};

/// Averages delta_ps over each subject's usable trials per condition.
/// Trials whose delta_ps cannot be computed are skipped with a warning.
DeltaPsTable build_delta_ps_table(std::span<const SessionRecording> sessions, const TableOptions& options = {});

struct EffectResult {
  double ss = 0.0;
  double ms = 0.0;
  double df_num = 0.0;
  double df_den = 0.0;
  double error_ss = 0.0;
  double error_ms = 0.0;
  double f = 0.0;
  double p = 1.0;
  double epsilon = 1.0;          ///< Greenhouse-Geisser, 1 when uncorrected
  bool degenerate = false;       ///< error variance is zero
  bool p_below_floor = false;    ///< p underflows; reported as 0
};

struct AnovaResult {
  std::size_t n_subjects = 0;
  double ss_total = 0.0;
  double ss_subject = 0.0;
  EffectResult target;
  EffectResult displacement;
  EffectResult interaction;
  bool sphericity_corrected = false;

  bool degenerate() const noexcept {
    return target.degenerate || displacement.degenerate || interaction.degenerate;
  }
};

struct AnovaOptions {
  /// Off by default: uncorrected (2, 18) degrees of freedom are reported.
  bool greenhouse_geisser = false;
};

/// Two-way within-subject ANOVA (target x displacement), each effect tested
/// against its own effect-by-subject error term.
AnovaResult rm_anova_2way(const DeltaPsTable& table, const AnovaOptions& options = {});

struct Comparison {
  std::string label;
  std::size_t target_level = 0;
  std::size_t low_level = 0;
  std::size_t high_level = 0;
  double delta_n = 0.0;     ///< mean(high) - mean(low)
  double t = 0.0;
  double df = 0.0;
  double p_raw = 1.0;
  double p_holm = 1.0;
};

struct ComparisonResult {
  std::vector<Comparison> pairs;
  double ms_pool = 0.0;
  double df_pool = 0.0;
  bool degenerate = false;
};

/// Holm step-down adjustment; output order matches input.
std::vector<double> holm_adjust(std::span<const double> p);

/// Adjacent displacement levels within each target level (1.0 vs 0.5 and
/// 1.5 vs 1.0 mm). The displacement and interaction error terms are pooled
/// and the df of the pool come from the Satterthwaite combination; Holm is
/// applied jointly over all comparisons.
ComparisonResult holm_planned_comparisons(const DeltaPsTable& table, const AnovaResult& anova);

/// One subject's (or trial's) trace with the stimulus onset at `onset_index`.
struct AlignedTrace {
  std::string subject;
  std::vector<double> values;
  std::size_t onset_index = 0;
};

struct AverageTrace {
  std::string label;
  std::vector<double> t_s;     ///< relative to onset
  std::vector<double> mean;
  std::vector<double> se;      ///< across subjects, sd / sqrt(n)
  std::size_t n_subjects = 0;
  std::vector<std::string> warnings;
};

/// Onset-aligned pointwise mean and standard error. Traces are trimmed to
/// their common support; traces of the same subject are averaged first.
AverageTrace average_traces(std::span<const AlignedTrace> traces, double dt_s = 0.01);

struct AverageOptions {
  double pre_s = 1.0;
  double post_s = 3.0;
  bool include_training = false;
};

/// One onset-aligned mean/SE trace of f_mean per condition, in
/// `all_conditions()` order.
std::vector<AverageTrace> condition_average(std::span<const SessionRecording> sessions,
                                            const AverageOptions& options = {});

struct SideSplit {
  double target_force_n = 0.0;
  double finger_mean_n = 0.0;   ///< lever 1
  double thumb_mean_n = 0.0;    ///< lever 2
  std::size_t trials = 0;
};

struct SideSplitResult {
  std::array<SideSplit, kTargetForcesN.size()> per_target{};
  std::vector<std::string> warnings;
};

/// Per-side grip averaged over the second before each stimulus, pooled
/// across displacements for each target force.
SideSplitResult stable_phase_side_split(const SessionRecording& session, double window_s = 1.0,
                                        bool include_training = false);

}  // namespace gripkit
