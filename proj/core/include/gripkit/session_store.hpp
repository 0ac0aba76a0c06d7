#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gripkit/profile.hpp"
#include "gripkit/protocol.hpp"

namespace gripkit {

enum class SessionMode { Synthetic, Interactive, Hardware };

std::string_view mode_name(SessionMode m) noexcept;
std::optional<SessionMode> parse_mode(std::string_view name) noexcept;

enum class SessionStatus { Running, Complete, Aborted };

std::string_view status_name(SessionStatus s) noexcept;

/// Manifest entry for a trial whose samples are safely on disk.
struct TrialEntry {
  int trial_index = 0;
  std::string file;            ///< relative to the session directory
  std::size_t samples = 0;
  TrialMarkers markers;
  bool completed = false;
  bool corrupt = false;
  bool timed_out = false;
  bool stalled = false;
};

struct SessionManifest {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::string session_id;
  std::uint64_t seed = 0;
  std::string plan_digest;
  SessionPlan plan;
  DeviceProfile profile;
  std::string participant;
  SessionMode mode = SessionMode::Synthetic;
  std::string created_at;
  SessionStatus status = SessionStatus::Running;
  std::string abort_reason;
  std::vector<TrialEntry> trials;

  /// Index of the newest trial listed; everything up to it is on disk.
  std::optional<int> last_complete_trial() const;
};

std::string manifest_to_json(const SessionManifest& m);
SessionManifest manifest_from_json(const std::string& text, const std::string& source_name);

/// Column order of a trial file.
inline constexpr std::array<std::string_view, 9> kTrialColumns{
    "t_s", "f_m_N", "t_m_Nm", "f_grip_1_N", "f_grip_2_N", "f_mean_N", "tactor_x_mm", "tactor_y_mm", "phase"};

void write_trial_csv(std::ostream& out, const TrialRecord& trial);
std::vector<TrialSample> read_trial_csv(std::istream& in, const std::string& source_name);

/// Owns one session directory: `manifest.json` plus `trials/trial_NNN.csv`.
/// Each trial file is written under a temporary name and renamed into
/// place before the manifest (itself replaced atomically) lists it, so a
/// crash at any point leaves a readable prefix of the session.
class SessionWriter {
 public:
  struct Options {
    /// fsync every file; off only for bulk export of finished recordings.
    bool sync = true;
  };

  SessionWriter(const std::filesystem::path& root, SessionManifest manifest);
  SessionWriter(const std::filesystem::path& root, SessionManifest manifest, Options options);

  void append_trial(const TrialRecord& trial);
  void finish();
  /// Marks the session as holding partial data. Never throws.
  void abort(const std::string& reason) noexcept;

  const std::filesystem::path& directory() const noexcept { return dir_; }
  const SessionManifest& manifest() const noexcept { return manifest_; }

 private:
  void write_manifest();

  std::filesystem::path dir_;
  SessionManifest manifest_;
  Options options_;
};

struct LoadedSession {
  SessionManifest manifest;
  SessionRecording recording;
  std::filesystem::path directory;
};

/// Reads a session directory, checking the plan digest and every listed
/// trial file.
LoadedSession load_session(const std::filesystem::path& dir);

/// Every path is either a session directory or a directory of them.
/// Throws NoSessions when nothing is found.
std::vector<std::filesystem::path> find_sessions(std::span<const std::filesystem::path> paths);

/// Writes a whole recording at once (synthetic studies).
std::filesystem::path save_recording(const std::filesystem::path& root, const SessionRecording& recording,
                                     const DeviceProfile& profile, SessionMode mode,
                                     const std::string& created_at);

}  // namespace gripkit
