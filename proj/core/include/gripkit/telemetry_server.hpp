#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "gripkit/telemetry.hpp"

namespace gripkit {

/// WebSocket endpoints for the browser console. Every text message is one
/// newline-terminated JSON object.
///
///   /participant   projected frames out; `{"grip": N}` accepted in
///   /experimenter  full frames out
///   /input         `{"grip": N}` in, nothing out
///
/// Slow clients lose frames instead of delaying anyone else.
class TelemetryServer : public TelemetrySink {
 public:
  struct Options {
    std::string address = "127.0.0.1";
    unsigned short port = 0;           ///< 0 picks a free port
    std::size_t client_queue = 64;     ///< frames buffered per client
  };

  /// Starts listening immediately. `input` may be null.
  TelemetryServer(Options options, InputChannel* input);
  ~TelemetryServer() override;

  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  unsigned short port() const noexcept;
  void stop();

  void publish_participant(const std::string& line) override;
  void publish_experimenter(const std::string& line) override;

  std::size_t participant_clients() const;
  std::size_t experimenter_clients() const;
  std::size_t dropped_frames() const;
  std::size_t grip_messages() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gripkit
