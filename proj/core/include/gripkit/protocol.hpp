#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gripkit/actuator.hpp"

namespace gripkit {

struct TrialCondition {
  double displacement_mm = 0.5;
  double target_force_n = 5.0;

  bool operator==(const TrialCondition&) const = default;
};

inline constexpr std::array<double, 2> kTargetForcesN{5.0, 7.5};
inline constexpr std::array<double, 3> kDisplacementsMm{0.5, 1.0, 1.5};
inline constexpr std::size_t kConditionCount = kTargetForcesN.size() * kDisplacementsMm.size();

/// The six conditions, target-major: (5 N, 0.5), (5 N, 1.0), ... (7.5 N, 1.5).
const std::array<TrialCondition, kConditionCount>& all_conditions();
/// Index into `all_conditions()`; throws for conditions outside the design.
std::size_t condition_index(const TrialCondition& c);
std::size_t target_level(const TrialCondition& c);
std::size_t displacement_level(const TrialCondition& c);
std::string condition_label(const TrialCondition& c);

struct TrialSpec {
  TrialCondition condition;
  double stable_wait_s = 1.0;   ///< predetermined hold before the stimulus
  int block_index = 0;          ///< -1 for training
  int trial_index = 0;          ///< position in the 70-trial session
  bool training = false;
};

struct SessionPlan {
  static constexpr int kTrainingTrials = 10;
  static constexpr int kBlocks = 10;
  static constexpr int kTrialsPerBlock = static_cast<int>(kConditionCount);

  std::uint64_t seed = 0;
  std::vector<TrialSpec> training;
  std::vector<std::vector<TrialSpec>> blocks;

  /// Training first, then blocks in order: 70 trials.
  std::vector<TrialSpec> all_trials() const;
};

struct PlanOptions {
  double min_wait_s = 1.0;
  double max_wait_s = 4.0;
  double tick_s = 0.01;
};

/// Deterministic in `seed`. Each block is a Fisher-Yates permutation of the
/// six conditions; training trials are the first ten of two more permuted
/// blocks. Waits are uniform in [1, 4] s, snapped to the control tick so a
/// stimulus can start exactly on schedule.
SessionPlan plan_session(std::uint64_t seed, const PlanOptions& options = {});

/// Canonical text form used for the manifest digest.
std::string serialize_plan(const SessionPlan& plan);
/// 64-bit FNV-1a of `serialize_plan`, as 16 hex digits.
std::string plan_digest(const SessionPlan& plan);

enum class TrialPhase { RampUp, StableGrip, Stimulus, Wait, Released };

std::string_view phase_name(TrialPhase p) noexcept;
std::optional<TrialPhase> parse_phase(std::string_view name) noexcept;
bool legal_transition(TrialPhase from, TrialPhase to) noexcept;

enum class BandExitPolicy { ResetTimer, AbortTrial };

struct PhaseConfig {
  double band_halfwidth_n = 0.5;
  BandExitPolicy band_exit = BandExitPolicy::ResetTimer;
  double wait_after_onset_s = 3.0;
  double release_threshold_n = 0.5;
  double release_hold_s = 0.2;
  double tick_s = 0.01;
  int max_gap_ticks = 3;
  Axis stimulus_axis = Axis::X;
};

struct PhaseState {
  TrialPhase phase = TrialPhase::RampUp;
  std::optional<double> band_entry_s;
  std::optional<double> onset_s;
  std::optional<double> stimulus_end_s;
  std::optional<double> below_release_since_s;
  std::optional<double> last_tick_s;
  int stimulus_count = 0;
  bool corrupt = false;
  bool aborted = false;
  bool finished = false;
};

struct TickInput {
  double t_s = 0.0;
  double f_mean_n = 0.0;
  /// The actuator has completed the stimulus trajectory and settled.
  bool stimulus_done = false;
};

struct StartStimulus {
  double displacement_mm;
  Axis axis;
};

struct PhaseStep {
  PhaseState state;
  std::optional<StartStimulus> start_stimulus;
  bool phase_changed = false;
};

/// Pure transition function of the trial state machine:
/// RampUp -> StableGrip when the mean force enters target +/- band;
/// StableGrip -> Stimulus after `stable_wait` of continuous holding
/// (issues the stimulus); Stimulus -> Wait when the tactor is back;
/// Stimulus/Wait -> Released at onset + 3 s; the trial finishes once the
/// force stays under the release threshold for the hold time.
PhaseStep advance(const PhaseState& state, const TickInput& input, const TrialSpec& spec,
                  const PhaseConfig& config = {});

struct TrialSample {
  double t_s = 0.0;
  double f_m_n = 0.0;
  double t_m_nm = 0.0;
  double f_grip_1_n = 0.0;
  double f_grip_2_n = 0.0;
  double f_mean_n = 0.0;
  double tactor_x_mm = 0.0;
  double tactor_y_mm = 0.0;
  TrialPhase phase = TrialPhase::RampUp;
};

struct TrialMarkers {
  std::optional<double> stimulus_onset_s;
  std::optional<double> stimulus_end_s;
};

/// One trial's 100 Hz recording.
struct TrialRecord {
  TrialSpec spec;
  std::vector<TrialSample> samples;
  TrialMarkers markers;
  bool completed = false;
  bool corrupt = false;
  bool timed_out = false;
  bool stalled = false;
  /// Commanded per-side grips, simulation only; not persisted.
  std::vector<std::array<double, 2>> true_grips;

  bool usable() const noexcept { return completed && !corrupt && !timed_out; }
};

}  // namespace gripkit

namespace gripkit {

/// Everything recorded for one participant session, whether it came from
/// a live run, a synthetic run, or was loaded back from disk.
struct SessionRecording {
  std::string session_id;
  std::string participant;
  std::uint64_t seed = 0;
  SessionPlan plan;
  std::vector<TrialRecord> trials;
};

}  // namespace gripkit
