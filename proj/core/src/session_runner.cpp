#include "gripkit/session_runner.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include "gripkit/error.hpp"

namespace gripkit {

namespace {

using Clock = std::chrono::steady_clock;

struct TelemetryMessage {
  bool participant = false;
  std::string line;
};

class Publisher {
 public:
  Publisher(TelemetrySink* sink, std::size_t capacity, int keep_every)
      : sink_(sink), queue_(capacity), experimenter_(keep_every), participant_(keep_every) {
    if (sink_) thread_ = std::thread([this] { drain(); });
  }

  ~Publisher() { stop(); }

  void frame(const TelemetryFrame& f, bool phase_changed) {
    if (!sink_) return;
    const ParticipantFrame pf = project(f);
    if (experimenter_.keep(phase_changed)) offer({false, to_json_line(f)});
    const bool participant_changed = !last_participant_phase_ || *last_participant_phase_ != pf.phase;
    last_participant_phase_ = pf.phase;
    if (participant_.keep(participant_changed)) offer({true, to_json_line(pf)});
  }

  void status(std::string_view state, int trial) {
    if (!sink_) return;
    const std::string line = status_line(state, trial);
    offer({true, line});
    offer({false, line});
  }

  void stop() {
    queue_.close();
    if (thread_.joinable()) thread_.join();
  }

  std::size_t dropped() const { return queue_.dropped(); }
  std::size_t sent() const { return sent_; }

 private:
  void offer(TelemetryMessage m) { queue_.try_push(std::move(m)); }

  void drain() {
    while (auto m = queue_.pop()) {
      try {
        if (m->participant) {
          sink_->publish_participant(m->line);
        } else {
          sink_->publish_experimenter(m->line);
        }
        ++sent_;
      } catch (...) {
        // A failing console never stops the recording.
      }
    }
  }

  TelemetrySink* sink_;
  BoundedQueue<TelemetryMessage> queue_;
  Decimator experimenter_;
  Decimator participant_;
  std::optional<ParticipantPhase> last_participant_phase_;
  std::atomic<std::size_t> sent_{0};
  std::thread thread_;
};

class Recorder {
 public:
  Recorder(SessionWriter& writer, std::size_t capacity) : writer_(writer), queue_(capacity) {
    thread_ = std::thread([this] { drain(); });
  }

  ~Recorder() { stop(); }

  void push(std::shared_ptr<const TrialRecord> trial) { queue_.push(std::move(trial)); }

  void stop() {
    queue_.close();
    if (thread_.joinable()) thread_.join();
  }

  bool failed() const noexcept { return failed_; }
  std::string failure() const {
    std::lock_guard lock(mu_);
    return failure_;
  }
  int written() const noexcept { return written_; }

 private:
  void drain() {
    while (auto t = queue_.pop()) {
      if (failed_) continue;
      try {
        writer_.append_trial(**t);
        ++written_;
      } catch (const std::exception& e) {
        std::lock_guard lock(mu_);
        failure_ = e.what();
        failed_ = true;
      }
    }
  }

  SessionWriter& writer_;
  BoundedQueue<std::shared_ptr<const TrialRecord>> queue_;
  mutable std::mutex mu_;
  std::string failure_;
  std::atomic<bool> failed_{false};
  std::atomic<int> written_{0};
  std::thread thread_;
};

SimulationConfig effective_config(const RunOptions& options) {
  SimulationConfig cfg = options.simulation;
  cfg.coefficients = options.profile.coefficients;
  cfg.actuator = options.profile.actuator;
  return cfg;
}

RunResult run_impl(const RunOptions& options, GripSource& source, const InputChannel* channel, TelemetrySink* sink) {
  options.profile.coefficients.validate();
  const SimulationConfig config = effective_config(options);
  const SessionPlan plan = plan_session(options.plan_seed);

  SessionManifest manifest;
  manifest.session_id = options.session_id.empty() ? "session-" + std::to_string(options.plan_seed)
                                                   : options.session_id;
  manifest.seed = options.session_seed;
  manifest.plan = plan;
  manifest.profile = options.profile;
  manifest.participant = options.participant;
  manifest.mode = options.mode;
  manifest.created_at = options.created_at.empty() ? utc_timestamp_now() : options.created_at;

  SessionWriter writer(options.out_root, manifest);
  Recorder recorder(writer, options.write_queue);
  Publisher publisher(sink, options.telemetry_queue, options.telemetry_keep_every);

  const double dt = 1.0 / config.rig.sample_rate_hz;
  const bool paced = options.realtime_factor > 0.0;
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(paced ? dt / options.realtime_factor : dt));
  const auto stall_limit = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(options.stall_timeout_s));

  RunResult result;
  result.directory = writer.directory();
  const auto trials = plan.all_trials();
  int started = 0;
  for (const auto& spec : trials) {
    if (options.max_trials && started >= *options.max_trials) break;
    if (recorder.failed()) break;
    if (options.cancel && options.cancel->load()) {
      result.aborted = true;
      result.abort_reason = "cancelled";
      break;
    }
    ++started;
    TrialEngine engine(config, spec, trial_seed(options.session_seed, spec.trial_index),
                       homed_axis(Axis::X, config.actuator), homed_axis(Axis::Y, config.actuator));
    source.begin_trial(spec);
    publisher.status("trial_start", spec.trial_index);

    bool stalled = false;
    bool paused = false;
    auto deadline = Clock::now();
    while (!engine.finished()) {
      if (options.cancel && options.cancel->load()) break;
      int ticks = 1;
      if (paced) {
        std::this_thread::sleep_until(deadline);
        const auto now = Clock::now();
        if (channel) {
          const auto latest = channel->latest();
          const bool starved = !latest || now - latest->at > stall_limit;
          if (starved) {
            if (!paused) {
              paused = true;
              stalled = true;
              publisher.status("paused", spec.trial_index);
            }
            deadline = now + period;
            continue;
          }
          if (paused) {
            paused = false;
            publisher.status("running", spec.trial_index);
            deadline = now;
          }
        }
        const auto late = now - deadline;
        // Synthetic time advances one sample per step; pacing only throttles it.
        if (options.mode != SessionMode::Synthetic && late > period) ticks += static_cast<int>(late / period);
        deadline += period * ticks;
      }
      const auto tick = engine.step(source, ticks);
      const auto& s = tick.sample;
      TelemetryFrame frame{s.t_s,
                           s.f_mean_n,
                           s.phase,
                           spec.condition.target_force_n,
                           config.phases.band_halfwidth_n,
                           spec.trial_index,
                           spec.block_index,
                           spec.training,
                           s.f_grip_1_n,
                           s.f_grip_2_n,
                           s.tactor_x_mm};
      publisher.frame(frame, tick.phase_changed);
    }
    if (!engine.finished()) {
      result.aborted = true;
      result.abort_reason = "cancelled";
      break;
    }
    auto record = std::make_shared<TrialRecord>(engine.take_record());
    record->stalled = stalled;
    publisher.status("trial_end", spec.trial_index);
    if (options.on_trial_end) options.on_trial_end(*record);
    recorder.push(std::move(record));
  }

  recorder.stop();
  publisher.status(result.aborted || recorder.failed() ? "aborted" : "finished", started);
  publisher.stop();
  result.trials_written = recorder.written();
  result.telemetry_dropped = publisher.dropped();
  result.telemetry_sent = publisher.sent();

  if (recorder.failed()) {
    result.aborted = true;
    result.abort_reason = "disk write failed: " + recorder.failure();
  }
  if (result.aborted) {
    writer.abort(result.abort_reason);
  } else if (!options.max_trials || started == static_cast<int>(trials.size())) {
    writer.finish();
  }
  if (recorder.failed()) throw Error(ErrorCategory::Io, result.abort_reason);
  return result;
}

}  // namespace

GripCommand ChannelInput::next(const GripContext&) {
  const auto latest = channel_.latest();
  const double g = latest ? latest->grip_n : 0.0;
  return split_grip(g, 1.0);
}

ReplayInput::ReplayInput(std::vector<std::vector<double>> per_trial) : script_(std::move(per_trial)) {}

void ReplayInput::begin_trial(const TrialSpec&) {
  if (started_) ++trial_;
  started_ = true;
  tick_ = 0;
}

GripCommand ReplayInput::next(const GripContext& ctx) {
  if (trial_ < script_.size() && tick_ < script_[trial_].size()) {
    channel_.submit(script_[trial_][tick_]);
  } else {
    channel_.submit(0.0);
  }
  ++tick_;
  return reader_.next(ctx);
}

void RecordingSource::begin_trial(const TrialSpec& spec) {
  script_.emplace_back();
  inner_.begin_trial(spec);
}

GripCommand RecordingSource::next(const GripContext& ctx) {
  const GripCommand g = inner_.next(ctx);
  if (script_.empty()) script_.emplace_back();
  script_.back().push_back(0.5 * (std::max(0.0, g.grip_1_n) + std::max(0.0, g.grip_2_n)));
  return g;
}

RunResult run_loop(const RunOptions& options, const InputChannel* input, TelemetrySink* sink) {
  switch (options.mode) {
    case SessionMode::Synthetic: {
      options.participant_model.validate();
      SyntheticParticipant participant(options.participant_model, Rng::mix(options.session_seed, 0xBEEF));
      return run_impl(options, participant, nullptr, sink);
    }
    case SessionMode::Interactive: {
      if (!input) throw Error(ErrorCategory::InvalidArgument, "interactive mode needs an input channel");
      ChannelInput source(*input);
      return run_impl(options, source, input, sink);
    }
    case SessionMode::Hardware:
      throw Error(ErrorCategory::Unsupported, "hardware mode needs the serial bridge, which this build does not include");
  }
  throw Error(ErrorCategory::InvalidArgument, "unknown mode");
}

RunResult run_loop_with_source(const RunOptions& options, GripSource& source, TelemetrySink* sink) {
  return run_impl(options, source, nullptr, sink);
}

}  // namespace gripkit
