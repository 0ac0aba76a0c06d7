#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "gripkit/protocol.hpp"

namespace gripkit {

/// Full per-tick state for the experimenter console.
struct TelemetryFrame {
  double t_s = 0.0;
  double f_mean_n = 0.0;
  TrialPhase phase = TrialPhase::RampUp;
  double target_n = 0.0;
  double band_n = 0.0;
  int trial_index = 0;
  int block_index = 0;
  bool training = false;
  // Experimenter only.
  double f_grip_1_n = 0.0;
  double f_grip_2_n = 0.0;
  double tactor_x_mm = 0.0;
};

/// What the participant may see. Stimulus, wait and stable phases all show
/// as "hold", so neither the phase nor any other field reveals when the
/// tactor moves.
enum class ParticipantPhase { Reach, Hold, Release };

std::string_view participant_phase_name(ParticipantPhase p) noexcept;
ParticipantPhase project_phase(TrialPhase p) noexcept;

struct ParticipantFrame {
  double t_s = 0.0;
  double f_mean_n = 0.0;
  ParticipantPhase phase = ParticipantPhase::Reach;
  double target_n = 0.0;
  double band_n = 0.0;
  int trial_index = 0;
  int block_index = 0;
  bool training = false;
};

ParticipantFrame project(const TelemetryFrame& frame) noexcept;

/// One JSON object per line, newline terminated.
std::string to_json_line(const TelemetryFrame& frame);
std::string to_json_line(const ParticipantFrame& frame);

/// Keys a participant frame may carry; anything else is a leak.
inline constexpr std::array<std::string_view, 9> kParticipantFrameKeys{
    "type", "t", "f_mean", "phase", "target", "band", "trial", "block", "training"};

/// Session-level events shared by both endpoints.
std::string status_line(std::string_view state, int trial_index);

/// `{"grip": newtons}`; nullopt for anything else. Negative grips clamp to 0.
std::optional<double> parse_grip_message(std::string_view text);

/// Keeps every n-th frame. A forced frame is always kept and restarts the
/// count, so phase changes reach the display immediately.
class Decimator {
 public:
  explicit Decimator(int keep_every = 3) : keep_every_(keep_every < 1 ? 1 : keep_every) {}

  bool keep(bool force = false) noexcept {
    if (force || count_ == 0) {
      count_ = keep_every_ - 1;
      return true;
    }
    --count_;
    return false;
  }

 private:
  int keep_every_;
  int count_ = 0;
};

/// Multi-producer, multi-consumer FIFO with a fixed capacity.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  /// Returns false (and counts a drop) when full or closed.
  bool try_push(T value) {
    {
      std::lock_guard lock(mu_);
      if (closed_ || items_.size() >= capacity_) {
        ++dropped_;
        return false;
      }
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
    return true;
  }

  /// Waits for room. Returns false only if the queue was closed.
  bool push(T value) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    lock.unlock();
    cv_.notify_all();
    return true;
  }

  /// Blocks until an item arrives; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    lock.unlock();
    cv_.notify_all();
    return v;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::size_t dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

/// Receiver of serialized telemetry lines, e.g. the WebSocket server.
class TelemetrySink {
 public:
  virtual ~TelemetrySink() = default;
  virtual void publish_participant(const std::string& line) = 0;
  virtual void publish_experimenter(const std::string& line) = 0;
};

/// Latest grip submitted by the console; written by the network thread,
/// read by the loop.
class InputChannel {
 public:
  using Clock = std::chrono::steady_clock;

  struct Sample {
    double grip_n = 0.0;
    Clock::time_point at;
    std::uint64_t sequence = 0;
  };

  void submit(double grip_n, Clock::time_point at = Clock::now()) {
    std::lock_guard lock(mu_);
    latest_ = Sample{grip_n, at, ++sequence_};
  }

  std::optional<Sample> latest() const {
    std::lock_guard lock(mu_);
    return latest_;
  }

 private:
  mutable std::mutex mu_;
  std::optional<Sample> latest_;
  std::uint64_t sequence_ = 0;
};

}  // namespace gripkit
