#include "gripkit/session_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "detail/file_util.hpp"
#include "detail/json_util.hpp"
#include "detail/profile_json.hpp"
#include "gripkit/csv.hpp"

namespace gripkit {

namespace fs = std::filesystem;
using detail::field;
using detail::Json;

namespace {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const Json& j, std::string_view key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

Json plan_json(const SessionPlan& plan) {
  Json trials = Json::array();
  for (const auto& t : plan.all_trials()) {
    trials.push_back({{"trial_index", t.trial_index},
                      {"block_index", t.block_index},
                      {"training", t.training},
                      {"target_force_n", t.condition.target_force_n},
                      {"displacement_mm", t.condition.displacement_mm},
                      {"stable_wait_s", t.stable_wait_s}});
  }
  return {{"seed", plan.seed}, {"trials", trials}, {"text", serialize_plan(plan)}};
}

SessionPlan plan_from(const Json& j, const std::string& src) {
  SessionPlan plan;
  plan.seed = field<std::uint64_t>(j, "seed", src);
  std::map<int, std::vector<TrialSpec>> blocks;
  for (const auto& t : field<Json>(j, "trials", src)) {
    TrialSpec s;
    s.trial_index = field<int>(t, "trial_index", src);
    s.block_index = field<int>(t, "block_index", src);
    s.training = field<bool>(t, "training", src);
    s.condition.target_force_n = field<double>(t, "target_force_n", src);
    s.condition.displacement_mm = field<double>(t, "displacement_mm", src);
    s.stable_wait_s = field<double>(t, "stable_wait_s", src);
    if (s.training) {
      plan.training.push_back(s);
    } else {
      blocks[s.block_index].push_back(s);
    }
  }
  for (auto& [_, b] : blocks) plan.blocks.push_back(std::move(b));
  return plan;
}

std::string trial_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trials/trial_%03d.csv", index);
  return buf;
}

}  // namespace

std::string_view mode_name(SessionMode m) noexcept {
  switch (m) {
    case SessionMode::Synthetic: return "synthetic";
    case SessionMode::Interactive: return "interactive";
    case SessionMode::Hardware: return "hardware";
  }
  return "unknown";
}

std::optional<SessionMode> parse_mode(std::string_view name) noexcept {
  for (auto m : {SessionMode::Synthetic, SessionMode::Interactive, SessionMode::Hardware}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view status_name(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Complete: return "complete";
    case SessionStatus::Aborted: return "aborted";
  }
  return "unknown";
}

std::optional<int> SessionManifest::last_complete_trial() const {
  if (trials.empty()) return std::nullopt;
  return trials.back().trial_index;
}

std::string manifest_to_json(const SessionManifest& m) {
  Json trials = Json::array();
  for (const auto& t : m.trials) {
    trials.push_back({{"trial_index", t.trial_index},
                      {"file", t.file},
                      {"samples", t.samples},
                      {"stimulus_onset_s", optional_json(t.markers.stimulus_onset_s)},
                      {"stimulus_end_s", optional_json(t.markers.stimulus_end_s)},
                      {"completed", t.completed},
                      {"corrupt", t.corrupt},
                      {"timed_out", t.timed_out},
                      {"stalled", t.stalled}});
  }
  const auto last = m.last_complete_trial();
  Json doc = {{"format_version", m.format_version},
              {"session_id", m.session_id},
              {"seed", m.seed},
              {"plan_digest", m.plan_digest},
              {"plan", plan_json(m.plan)},
              {"device_profile", detail::profile_json(m.profile)},
              {"participant", m.participant},
              {"mode", std::string(mode_name(m.mode))},
              {"created_at", m.created_at},
              {"status", std::string(status_name(m.status))},
              {"partial", m.status == SessionStatus::Aborted},
              {"last_complete_trial", last ? Json(*last) : Json(nullptr)},
              {"trials", trials}};
  if (!m.abort_reason.empty()) doc["abort_reason"] = m.abort_reason;
  return doc.dump(2) + "\n";
}

SessionManifest manifest_from_json(const std::string& text, const std::string& src) {
  const Json j = detail::parse_json(text, src);
  SessionManifest m;
  m.format_version = field<int>(j, "format_version", src);
  if (m.format_version != SessionManifest::kFormatVersion) {
    throw ParseError(src, 0, 0, "unsupported format_version " + std::to_string(m.format_version));
  }
  m.session_id = field<std::string>(j, "session_id", src);
  m.seed = field<std::uint64_t>(j, "seed", src);
  m.plan_digest = field<std::string>(j, "plan_digest", src);
  m.plan = plan_from(field<Json>(j, "plan", src), src);
  m.profile = detail::profile_from(field<Json>(j, "device_profile", src), src);
  m.participant = field<std::string>(j, "participant", src);
  const auto mode = parse_mode(field<std::string>(j, "mode", src));
  if (!mode) throw ParseError(src, 0, 0, "unknown mode");
  m.mode = *mode;
  m.created_at = field<std::string>(j, "created_at", src);
  const auto status = field<std::string>(j, "status", src);
  if (status == "running") {
    m.status = SessionStatus::Running;
  } else if (status == "complete") {
    m.status = SessionStatus::Complete;
  } else if (status == "aborted") {
    m.status = SessionStatus::Aborted;
  } else {
    throw ParseError(src, 0, 0, "unknown status '" + status + "'");
  }
  m.abort_reason = detail::field_or<std::string>(j, "abort_reason", "", src);
  for (const auto& t : field<Json>(j, "trials", src)) {
    TrialEntry e;
    e.trial_index = field<int>(t, "trial_index", src);
    e.file = field<std::string>(t, "file", src);
    e.samples = field<std::size_t>(t, "samples", src);
    e.markers.stimulus_onset_s = optional_from(t, "stimulus_onset_s");
    e.markers.stimulus_end_s = optional_from(t, "stimulus_end_s");
    e.completed = field<bool>(t, "completed", src);
    e.corrupt = field<bool>(t, "corrupt", src);
    e.timed_out = field<bool>(t, "timed_out", src);
    e.stalled = field<bool>(t, "stalled", src);
    m.trials.push_back(e);
  }
  if (plan_digest(m.plan) != m.plan_digest) {
    throw ParseError(src, 0, 0, "plan digest does not match the stored plan");
  }
  return m;
}

void write_trial_csv(std::ostream& out, const TrialRecord& trial) {
  for (std::size_t i = 0; i < kTrialColumns.size(); ++i) out << (i ? "," : "") << kTrialColumns[i];
  out << '\n';
  for (const auto& s : trial.samples) {
    out << format_fixed(s.t_s, 6) << ',' << format_roundtrip(s.f_m_n) << ',' << format_roundtrip(s.t_m_nm)
        << ',' << format_roundtrip(s.f_grip_1_n) << ',' << format_roundtrip(s.f_grip_2_n) << ','
        << format_roundtrip(s.f_mean_n) << ',' << format_roundtrip(s.tactor_x_mm) << ','
        << format_roundtrip(s.tactor_y_mm) << ',' << phase_name(s.phase) << '\n';
  }
}

std::vector<TrialSample> read_trial_csv(std::istream& in, const std::string& source_name) {
  CsvReader reader(in, source_name);
  reader.expect_header({kTrialColumns[0], kTrialColumns[1], kTrialColumns[2], kTrialColumns[3], kTrialColumns[4],
                        kTrialColumns[5], kTrialColumns[6], kTrialColumns[7], kTrialColumns[8]});
  std::vector<TrialSample> out;
  while (auto row = reader.next_row()) {
    TrialSample s;
    s.t_s = reader.parse_double(*row, 0);
    s.f_m_n = reader.parse_double(*row, 1);
    s.t_m_nm = reader.parse_double(*row, 2);
    s.f_grip_1_n = reader.parse_double(*row, 3);
    s.f_grip_2_n = reader.parse_double(*row, 4);
    s.f_mean_n = reader.parse_double(*row, 5);
    s.tactor_x_mm = reader.parse_double(*row, 6);
    s.tactor_y_mm = reader.parse_double(*row, 7);
    const auto phase = parse_phase((*row)[8].text);
    if (!phase) throw ParseError(source_name, reader.line(), reader.column_of(*row, 8), "unknown phase");
    s.phase = *phase;
    out.push_back(s);
  }
  return out;
}

SessionWriter::SessionWriter(const fs::path& root, SessionManifest manifest)
    : SessionWriter(root, std::move(manifest), Options{}) {}

SessionWriter::SessionWriter(const fs::path& root, SessionManifest manifest, Options options)
    : manifest_(std::move(manifest)), options_(options) {
  if (manifest_.session_id.empty()) throw Error(ErrorCategory::InvalidArgument, "session id is empty");
  manifest_.plan_digest = plan_digest(manifest_.plan);
  manifest_.status = SessionStatus::Running;
  dir_ = root / manifest_.session_id;
  std::error_code ec;
  fs::create_directories(dir_ / "trials", ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create " + dir_.string() + ": " + ec.message());
  write_manifest();
}

void SessionWriter::append_trial(const TrialRecord& trial) {
  const std::string rel = trial_file_name(trial.spec.trial_index);
  std::ostringstream body;
  write_trial_csv(body, trial);
  const fs::path final_path = dir_ / rel;
  const fs::path part = final_path.string() + ".part";
  detail::write_file_atomic(part, body.str(), options_.sync);
  std::error_code ec;
  fs::rename(part, final_path, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot rename " + part.string() + ": " + ec.message());

  TrialEntry e;
  e.trial_index = trial.spec.trial_index;
  e.file = rel;
  e.samples = trial.samples.size();
  e.markers = trial.markers;
  e.completed = trial.completed;
  e.corrupt = trial.corrupt;
  e.timed_out = trial.timed_out;
  e.stalled = trial.stalled;
  manifest_.trials.push_back(e);
  write_manifest();
}

void SessionWriter::finish() {
  manifest_.status = SessionStatus::Complete;
  write_manifest();
}

void SessionWriter::abort(const std::string& reason) noexcept {
  try {
    manifest_.status = SessionStatus::Aborted;
    manifest_.abort_reason = reason;
    write_manifest();
  } catch (...) {
    // The previous manifest is still intact and names the last good trial.
  }
}

void SessionWriter::write_manifest() {
  detail::write_file_atomic(dir_ / "manifest.json", manifest_to_json(manifest_), options_.sync);
}

LoadedSession load_session(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  LoadedSession out;
  out.directory = dir;
  out.manifest = manifest_from_json(detail::read_text_file(manifest_path), manifest_path.string());
  const auto& m = out.manifest;
  auto& rec = out.recording;
  rec.session_id = m.session_id;
  rec.participant = m.participant;
  rec.seed = m.seed;
  rec.plan = m.plan;
  const auto specs = m.plan.all_trials();
  for (const auto& e : m.trials) {
    if (e.trial_index < 0 || static_cast<std::size_t>(e.trial_index) >= specs.size()) {
      throw ParseError(manifest_path.string(), 0, 0, "trial index " + std::to_string(e.trial_index) +
                                                          " is outside the plan");
    }
    const fs::path p = dir / e.file;
    std::ifstream in(p);
    if (!in) throw Error(ErrorCategory::Io, "missing trial file " + p.string());
    TrialRecord t;
    t.spec = specs[static_cast<std::size_t>(e.trial_index)];
    t.samples = read_trial_csv(in, p.string());
    if (t.samples.size() != e.samples) {
      throw ParseError(p.string(), 0, 0, "expected " + std::to_string(e.samples) + " samples, found " +
                                             std::to_string(t.samples.size()));
    }
    t.markers = e.markers;
    t.completed = e.completed;
    t.corrupt = e.corrupt;
    t.timed_out = e.timed_out;
    t.stalled = e.stalled;
    rec.trials.push_back(std::move(t));
  }
  return out;
}

std::vector<fs::path> find_sessions(std::span<const fs::path> paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_regular_file(p / "manifest.json")) {
      out.push_back(p);
      continue;
    }
    if (!fs::is_directory(p)) continue;
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json")) found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  if (out.empty()) throw Error(ErrorCategory::NoSessions, "no sessions found");
  return out;
}

fs::path save_recording(const fs::path& root, const SessionRecording& recording, const DeviceProfile& profile,
                        SessionMode mode, const std::string& created_at) {
  SessionManifest m;
  m.session_id = recording.session_id;
  m.seed = recording.seed;
  m.plan = recording.plan;
  m.profile = profile;
  m.participant = recording.participant;
  m.mode = mode;
  m.created_at = created_at;
  SessionWriter writer(root, std::move(m), {.sync = false});
  for (const auto& t : recording.trials) writer.append_trial(t);
  writer.finish();
  return writer.directory();
}

}  // namespace gripkit
