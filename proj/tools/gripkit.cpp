#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "gripkit/actuator.hpp"
#include "gripkit/calibration.hpp"
#include "gripkit/error.hpp"
#include "gripkit/profile.hpp"
#include "gripkit/report.hpp"
#include "gripkit/rng.hpp"
#include "gripkit/session_runner.hpp"
#include "gripkit/session_store.hpp"
#include "gripkit/simulator.hpp"
#include "gripkit/telemetry_server.hpp"

namespace {

using gripkit::Error;
using gripkit::ErrorCategory;
using nlohmann::json;

std::atomic<bool> g_cancel{false};

void on_signal(int) { g_cancel = true; }

// Synthetic recordings carry a fixed creation stamp so reruns are identical.
constexpr const char* kVirtualEpoch = "1970-01-01T00:00:00Z";

gripkit::DeviceProfile profile_or_reference(const std::string& path) {
  return path.empty() ? gripkit::DeviceProfile::reference() : gripkit::load_profile(path);
}

json coefficients_json(const gripkit::CalibrationCoefficients& c) {
  return {{"alpha_1", c.alpha_1},         {"alpha_2", c.alpha_2}, {"beta_1_per_m", c.beta_1_per_m},
          {"beta_2_per_m", c.beta_2_per_m}, {"d_1_m", c.d_1_m},     {"d_2_m", c.d_2_m},
          {"ratio_1", c.ratio_1},         {"ratio_2", c.ratio_2}};
}

int cmd_calibrate(const std::string& sweep_path, const std::string& out, double r2_floor) {
  const auto sweeps = gripkit::read_sweep_csv_file(sweep_path);
  gripkit::FitOptions opts;
  opts.r2_floor = r2_floor;
  const auto report = gripkit::calibrate(sweeps, opts);
  gripkit::DeviceProfile profile;
  profile.coefficients = report.coefficients;
  profile.fit_1 = report.fit_1;
  profile.fit_2 = report.fit_2;
  profile.source = sweep_path;
  profile.calibrated_at = gripkit::utc_timestamp_now();
  gripkit::save_profile(out, profile);
  json warnings = report.fit_1.warnings;
  for (const auto& w : report.fit_2.warnings) warnings.push_back(w);
  std::cout << json{{"profile", out},
                    {"coefficients", coefficients_json(report.coefficients)},
                    {"r2", {report.fit_1.r2_force, report.fit_1.r2_torque, report.fit_2.r2_force,
                            report.fit_2.r2_torque}},
                    {"warnings", warnings}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_make_sweep(const std::string& out, double noise_force, double noise_torque, std::uint64_t seed) {
  gripkit::RigConfig rig;
  std::vector<gripkit::SweepRecord> sweeps;
  for (auto lever : {gripkit::Lever::One, gripkit::Lever::Two}) {
    gripkit::SweepOptions o;
    o.noise_sd_force_n = noise_force;
    o.noise_sd_torque_nm = noise_torque;
    o.seed = gripkit::Rng::mix(seed, static_cast<std::uint64_t>(lever));
    sweeps.push_back(gripkit::generate_sweep(lever, rig, o));
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCategory::Io, "cannot write " + out);
  gripkit::write_sweep_csv(f, sweeps);
  return 0;
}

int cmd_home(const std::string& profile_path, double offset_mm) {
  const auto profile = profile_or_reference(profile_path);
  json axes = json::array();
  for (auto axis : {gripkit::Axis::X, gripkit::Axis::Y}) {
    const auto start = gripkit::make_unhomed(axis, offset_mm, profile.actuator);
    const auto homed = gripkit::home(start, profile.actuator);
    axes.push_back({{"axis", axis == gripkit::Axis::X ? "x" : "y"},
                    {"homed", homed.homed},
                    {"position_counts", homed.encoder_counts()},
                    {"stop_low_counts", homed.stop_low_counts},
                    {"stop_high_counts", homed.stop_high_counts},
                    {"centre_error_counts", 0.5 * (homed.stop_low_counts + homed.stop_high_counts)}});
  }
  std::cout << json{{"mode", "simulated"}, {"axes", axes}}.dump(2) << "\n";
  return 0;
}

int cmd_simulate_study(int subjects, std::uint64_t seed, const std::string& out, const std::string& profile_path) {
  const auto profile = profile_or_reference(profile_path);
  gripkit::SimulationConfig config;
  config.coefficients = profile.coefficients;
  config.actuator = profile.actuator;
  const auto study = gripkit::run_synthetic_study(subjects, gripkit::PopulationSpec{}, config, seed);
  json dirs = json::array();
  for (const auto& rec : study) {
    dirs.push_back(gripkit::save_recording(out, rec, profile, gripkit::SessionMode::Synthetic, kVirtualEpoch).string());
  }
  std::cout << json{{"sessions", dirs}}.dump(2) << "\n";
  return 0;
}

struct RunArgs {
  std::string mode = "interactive";
  std::uint64_t plan_seed = 1;
  std::uint64_t session_seed = 0;
  int port = 8765;
  std::string out = "sessions";
  std::string participant;
  std::string session_id;
  std::string profile;
  double realtime = 1.0;
  int max_trials = 0;
};

int cmd_run(RunArgs a) {
  if (const char* env = std::getenv("PORT"); env && *env) {
    try {
      a.port = std::stoi(env);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::InvalidArgument, std::string("PORT is not a number: ") + env);
    }
  }
  const auto mode = gripkit::parse_mode(a.mode);
  if (!mode) throw Error(ErrorCategory::InvalidArgument, "unknown mode '" + a.mode + "'");
  if (*mode == gripkit::SessionMode::Hardware && !std::getenv("GRIPKIT_HARDWARE_BRIDGE")) {
    throw Error(ErrorCategory::Unsupported, "hardware mode needs the serial bridge, which this build does not include");
  }

  gripkit::RunOptions opts;
  opts.mode = *mode;
  opts.plan_seed = a.plan_seed;
  opts.session_seed = a.session_seed ? a.session_seed : a.plan_seed;
  opts.participant = a.participant;
  opts.profile = profile_or_reference(a.profile);
  opts.out_root = a.out;
  opts.realtime_factor = *mode == gripkit::SessionMode::Interactive ? 1.0 : a.realtime;
  if (a.max_trials > 0) opts.max_trials = a.max_trials;
  opts.cancel = &g_cancel;
  opts.session_id = !a.session_id.empty() ? a.session_id
                    : std::string(gripkit::mode_name(*mode)) + "-" + std::to_string(a.plan_seed) +
                          (a.participant.empty() ? "" : "-" + a.participant);
  if (*mode == gripkit::SessionMode::Synthetic) opts.created_at = kVirtualEpoch;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  gripkit::InputChannel input;
  std::unique_ptr<gripkit::TelemetryServer> server;
  if (a.port > 0) {
    gripkit::TelemetryServer::Options so;
    so.address = "0.0.0.0";
    so.port = static_cast<unsigned short>(a.port);
    server = std::make_unique<gripkit::TelemetryServer>(so, &input);
    std::cerr << json{{"listening", server->port()}}.dump() << std::endl;
  }
  const auto result = gripkit::run_loop(opts, &input, server.get());
  if (server) server->stop();
  std::cout << json{{"session", result.directory.string()},
                    {"trials_written", result.trials_written},
                    {"aborted", result.aborted},
                    {"abort_reason", result.abort_reason},
                    {"telemetry_dropped", result.telemetry_dropped}}
                   .dump(2)
            << "\n";
  return result.aborted ? gripkit::exit_code(ErrorCategory::Io) : 0;
}

int cmd_analyze(const std::vector<std::string>& inputs, const std::string& out, bool gg, bool training) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  const auto dirs = gripkit::find_sessions(paths);
  std::vector<gripkit::SessionRecording> sessions;
  for (const auto& d : dirs) sessions.push_back(gripkit::load_session(d).recording);
  gripkit::AnalysisOptions opts;
  opts.anova.greenhouse_geisser = gg;
  opts.table.include_training = training;
  opts.average.include_training = training;
  const auto report = gripkit::analyze_sessions(sessions, opts);
  gripkit::write_report(out, report);
  const auto effect = [](const gripkit::EffectResult& e) {
    return json{{"F", e.f}, {"df", {e.df_num, e.df_den}}, {"p", e.p}};
  };
  std::cout << json{{"report", out},
                    {"subjects", report.anova.n_subjects},
                    {"target", effect(report.anova.target)},
                    {"displacement", effect(report.anova.displacement)},
                    {"interaction", effect(report.anova.interaction)}}
                   .dump(2)
            << "\n";
  return 0;
}

int report_error(const Error& e) {
  json j = {{"error", std::string(gripkit::category_name(e.category()))}, {"message", e.what()}};
  if (const auto* pe = dynamic_cast<const gripkit::ParseError*>(&e)) {
    j["source"] = pe->source();
    j["line"] = pe->line();
    j["column"] = pe->column();
  }
  std::cerr << j.dump() << "\n";
  return gripkit::exit_code(e.category());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grip-force sensing and tactile stimulation toolkit"};
  app.require_subcommand(1);

  std::string sweep_path = GRIPKIT_BUNDLED_SWEEP, profile_out = "profile.json";
  double r2_floor = 0.99;
  auto* calibrate = app.add_subcommand("calibrate", "Fit decomposition coefficients from a load sweep");
  calibrate->add_option("sweep", sweep_path, "Sweep CSV (t_s,external_force_N,f_m_N,t_m_Nm,lever_id)");
  calibrate->add_option("--out", profile_out, "Device profile to create or extend")->capture_default_str();
  calibrate->add_option("--r2-floor", r2_floor, "Warn below this R^2")->capture_default_str();

  std::string sweep_out = "sweep.csv";
  double sweep_noise_f = 0.0, sweep_noise_t = 0.0;
  std::uint64_t sweep_seed = 1;
  auto* make_sweep = app.add_subcommand("make-sweep", "Write a simulated calibration sweep");
  make_sweep->add_option("--out", sweep_out)->capture_default_str();
  make_sweep->add_option("--noise-force", sweep_noise_f, "Sensor force noise SD, N");
  make_sweep->add_option("--noise-torque", sweep_noise_t, "Sensor torque noise SD, N m");
  make_sweep->add_option("--seed", sweep_seed)->capture_default_str();

  std::string home_profile;
  double home_offset = 0.8;
  auto* home = app.add_subcommand("home", "Home both tactor axes (simulated)");
  home->add_option("--profile", home_profile, "Device profile");
  home->add_option("--offset-mm", home_offset, "Power-up offset from the stroke centre")->capture_default_str();

  int subjects = 10;
  std::uint64_t study_seed = 1;
  std::string study_out = "study", study_profile;
  auto* simulate = app.add_subcommand("simulate-study", "Record synthetic participants");
  simulate->add_option("--subjects", subjects)->capture_default_str();
  simulate->add_option("--seed", study_seed)->capture_default_str();
  simulate->add_option("--out", study_out)->capture_default_str();
  simulate->add_option("--profile", study_profile, "Device profile");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one session with live telemetry");
  run->add_option("--mode", run_args.mode, "synthetic, interactive or hardware")->capture_default_str();
  run->add_option("--plan-seed", run_args.plan_seed)->capture_default_str();
  run->add_option("--session-seed", run_args.session_seed, "Defaults to the plan seed");
  run->add_option("--serve", run_args.port, "WebSocket port, 0 to disable; PORT overrides")->capture_default_str();
  run->add_option("--out", run_args.out)->capture_default_str();
  run->add_option("--participant", run_args.participant);
  run->add_option("--session-id", run_args.session_id);
  run->add_option("--profile", run_args.profile, "Device profile");
  run->add_option("--realtime", run_args.realtime, "Synthetic pacing, 0 = as fast as possible")->capture_default_str();
  run->add_option("--max-trials", run_args.max_trials, "Stop early after this many trials");

  std::vector<std::string> analyze_in;
  std::string report_out = "report";
  bool gg = false, training = false;
  auto* analyze = app.add_subcommand("analyze", "Statistics over recorded sessions");
  analyze->add_option("sessions", analyze_in, "Session directories or directories of sessions")->required();
  analyze->add_option("--out", report_out)->capture_default_str();
  analyze->add_flag("--greenhouse-geisser", gg, "Apply the sphericity correction");
  analyze->add_flag("--include-training", training, "Keep training trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*calibrate) return cmd_calibrate(sweep_path, profile_out, r2_floor);
    if (*make_sweep) return cmd_make_sweep(sweep_out, sweep_noise_f, sweep_noise_t, sweep_seed);
    if (*home) return cmd_home(home_profile, home_offset);
    if (*simulate) return cmd_simulate_study(subjects, study_seed, study_out, study_profile);
    if (*run) return cmd_run(run_args);
    if (*analyze) return cmd_analyze(analyze_in, report_out, gg, training);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
