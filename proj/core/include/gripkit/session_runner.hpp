#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gripkit/profile.hpp"
#include "gripkit/session_store.hpp"
#include "gripkit/simulator.hpp"
#include "gripkit/telemetry.hpp"
#include "gripkit/trial_engine.hpp"

namespace gripkit {

/// Grip from the console input channel, split evenly between the sides.
class ChannelInput : public GripSource {
 public:
  explicit ChannelInput(const InputChannel& channel) : channel_(channel) {}
  GripCommand next(const GripContext& ctx) override;

 private:
  const InputChannel& channel_;
};

/// Per-trial scripted mean grips, one per tick. Each value is pushed
/// through an InputChannel first so the same path as live input is used.
class ReplayInput : public GripSource {
 public:
  explicit ReplayInput(std::vector<std::vector<double>> per_trial);

  void begin_trial(const TrialSpec& spec) override;
  GripCommand next(const GripContext& ctx) override;

 private:
  std::vector<std::vector<double>> script_;
  InputChannel channel_;
  ChannelInput reader_{channel_};
  std::size_t trial_ = 0;
  std::size_t tick_ = 0;
  bool started_ = false;
};

/// Wraps a source and keeps the mean grip it produced at every tick.
class RecordingSource : public GripSource {
 public:
  explicit RecordingSource(GripSource& inner) : inner_(inner) {}

  void begin_trial(const TrialSpec& spec) override;
  GripCommand next(const GripContext& ctx) override;

  const std::vector<std::vector<double>>& script() const noexcept { return script_; }

 private:
  GripSource& inner_;
  std::vector<std::vector<double>> script_;
};

struct RunOptions {
  SessionMode mode = SessionMode::Synthetic;
  std::uint64_t plan_seed = 1;
  /// Seeds the rig noise and, in synthetic mode, the participant.
  std::uint64_t session_seed = 1;
  std::string session_id;
  std::string participant;
  std::string created_at;
  std::filesystem::path out_root;
  DeviceProfile profile = DeviceProfile::reference();
  SimulationConfig simulation;
  /// Synthetic participant used in synthetic mode.
  ParticipantModel participant_model = PopulationSpec::paper_shaped_participant();

  /// 0 runs ticks back to back on a virtual clock; 1 paces at real time.
  double realtime_factor = 0.0;
  /// Live input older than this pauses the trial (wall-clock modes).
  double stall_timeout_s = 0.2;
  int telemetry_keep_every = 3;
  std::size_t telemetry_queue = 256;
  std::size_t write_queue = 8;

  /// Stop after this many trials (the session stays "running").
  std::optional<int> max_trials;
  const std::atomic<bool>* cancel = nullptr;
  std::function<void(const TrialRecord&)> on_trial_end;
};

struct RunResult {
  std::filesystem::path directory;
  int trials_written = 0;
  bool aborted = false;
  std::string abort_reason;
  std::size_t telemetry_dropped = 0;
  std::size_t telemetry_sent = 0;
};

/// The 100 Hz loop: grip input, rig, decomposition, trial state machine
/// and actuators per tick, one trial after another. Recording goes to disk
/// and telemetry to `sink` from helper threads; telemetry is dropped when
/// the sink falls behind, samples never are.
///
/// `input` is required in interactive mode and ignored in synthetic mode.
/// Hardware mode needs the serial bridge, which this build lacks.
RunResult run_loop(const RunOptions& options, const InputChannel* input = nullptr, TelemetrySink* sink = nullptr);

/// Same as run_loop but with a caller-provided grip source (replay harness).
RunResult run_loop_with_source(const RunOptions& options, GripSource& source, TelemetrySink* sink = nullptr);

}  // namespace gripkit
