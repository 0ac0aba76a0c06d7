#include "gripkit/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>

#include "gripkit/csv.hpp"
#include "gripkit/error.hpp"
#include "gripkit/rng.hpp"

namespace gripkit {

namespace {

constexpr double kEps = 1e-9;

std::size_t level_of(double value, std::span<const double> levels, const char* what) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::abs(levels[i] - value) < 1e-9) return i;
  }
  throw Error(ErrorCategory::InvalidArgument, std::string(what) + " is not a design level");
}

template <typename T>
void fisher_yates(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<TrialCondition> permuted_block(Rng& rng) {
  const auto& all = all_conditions();
  std::vector<TrialCondition> block(all.begin(), all.end());
  fisher_yates(block, rng);
  return block;
}

double draw_wait(Rng& rng, const PlanOptions& o) {
  const double raw = rng.uniform(o.min_wait_s, o.max_wait_s);
  const double snapped = std::round(raw / o.tick_s) * o.tick_s;
  return std::clamp(snapped, o.min_wait_s, o.max_wait_s);
}

}  // namespace

const std::array<TrialCondition, kConditionCount>& all_conditions() {
  static const std::array<TrialCondition, kConditionCount> table = [] {
    std::array<TrialCondition, kConditionCount> t{};
    std::size_t i = 0;
    for (double target : kTargetForcesN) {
      for (double disp : kDisplacementsMm) t[i++] = {disp, target};
    }
    return t;
  }();
  return table;
}

std::size_t target_level(const TrialCondition& c) {
  return level_of(c.target_force_n, kTargetForcesN, "target force");
}

std::size_t displacement_level(const TrialCondition& c) {
  return level_of(c.displacement_mm, kDisplacementsMm, "displacement");
}

std::size_t condition_index(const TrialCondition& c) {
  return target_level(c) * kDisplacementsMm.size() + displacement_level(c);
}

std::string condition_label(const TrialCondition& c) {
  return format_fixed(c.target_force_n, 1) + "N_" + format_fixed(c.displacement_mm, 1) + "mm";
}

std::vector<TrialSpec> SessionPlan::all_trials() const {
  std::vector<TrialSpec> out(training.begin(), training.end());
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

SessionPlan plan_session(std::uint64_t seed, const PlanOptions& options) {
  Rng rng(seed);
  SessionPlan plan;
  plan.seed = seed;
  int index = 0;

  std::vector<TrialCondition> pool = permuted_block(rng);
  const auto second = permuted_block(rng);
  pool.insert(pool.end(), second.begin(), second.end());
  pool.resize(SessionPlan::kTrainingTrials);
  for (const auto& c : pool) {
    plan.training.push_back({c, draw_wait(rng, options), -1, index++, true});
  }

  for (int b = 0; b < SessionPlan::kBlocks; ++b) {
    std::vector<TrialSpec> block;
    for (const auto& c : permuted_block(rng)) {
      block.push_back({c, draw_wait(rng, options), b, index++, false});
    }
    plan.blocks.push_back(std::move(block));
  }
  return plan;
}

std::string serialize_plan(const SessionPlan& plan) {
  std::string out = "seed=" + std::to_string(plan.seed) + "\n";
  for (const auto& t : plan.all_trials()) {
    out += std::to_string(t.trial_index) + "," + std::to_string(t.block_index) + "," +
           (t.training ? "1" : "0") + "," + format_fixed(t.condition.target_force_n, 2) + "," +
           format_fixed(t.condition.displacement_mm, 2) + "," + format_fixed(t.stable_wait_s, 3) + "\n";
  }
  return out;
}

std::string plan_digest(const SessionPlan& plan) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_plan(plan)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view phase_name(TrialPhase p) noexcept {
  switch (p) {
    case TrialPhase::RampUp: return "ramp_up";
    case TrialPhase::StableGrip: return "stable_grip";
    case TrialPhase::Stimulus: return "stimulus";
    case TrialPhase::Wait: return "wait";
    case TrialPhase::Released: return "released";
  }
  return "unknown";
}

std::optional<TrialPhase> parse_phase(std::string_view name) noexcept {
  for (auto p : {TrialPhase::RampUp, TrialPhase::StableGrip, TrialPhase::Stimulus, TrialPhase::Wait,
                 TrialPhase::Released}) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

bool legal_transition(TrialPhase from, TrialPhase to) noexcept {
  if (from == to) return true;
  switch (from) {
    case TrialPhase::RampUp: return to == TrialPhase::StableGrip;
    case TrialPhase::StableGrip: return to == TrialPhase::Stimulus || to == TrialPhase::RampUp;
    case TrialPhase::Stimulus: return to == TrialPhase::Wait || to == TrialPhase::Released;
    case TrialPhase::Wait: return to == TrialPhase::Released;
    case TrialPhase::Released: return false;
  }
  return false;
}

PhaseStep advance(const PhaseState& state, const TickInput& in, const TrialSpec& spec,
                  const PhaseConfig& config) {
  PhaseStep step{state, std::nullopt, false};
  PhaseState& s = step.state;
  if (s.finished) return step;

  if (s.last_tick_s && in.t_s - *s.last_tick_s > config.max_gap_ticks * config.tick_s + kEps) {
    s.corrupt = true;
  }
  s.last_tick_s = in.t_s;

  const TrialPhase before = s.phase;
  const bool in_band = std::abs(in.f_mean_n - spec.condition.target_force_n) <= config.band_halfwidth_n;

  switch (s.phase) {
    case TrialPhase::RampUp:
      if (in_band) {
        s.phase = TrialPhase::StableGrip;
        s.band_entry_s = in.t_s;
      }
      break;
    case TrialPhase::StableGrip:
      if (!in_band) {
        s.band_entry_s.reset();
        if (config.band_exit == BandExitPolicy::AbortTrial) {
          s.aborted = true;
          s.finished = true;
        } else {
          s.phase = TrialPhase::RampUp;
        }
      } else if (in.t_s - *s.band_entry_s >= spec.stable_wait_s - kEps) {
        s.phase = TrialPhase::Stimulus;
        s.onset_s = in.t_s;
        ++s.stimulus_count;
        step.start_stimulus = StartStimulus{spec.condition.displacement_mm, config.stimulus_axis};
      }
      break;
    case TrialPhase::Stimulus:
      if (in.t_s - *s.onset_s >= config.wait_after_onset_s - kEps) {
        s.phase = TrialPhase::Released;
      } else if (in.stimulus_done) {
        s.phase = TrialPhase::Wait;
        s.stimulus_end_s = in.t_s;
      }
      break;
    case TrialPhase::Wait:
      if (in.t_s - *s.onset_s >= config.wait_after_onset_s - kEps) s.phase = TrialPhase::Released;
      break;
    case TrialPhase::Released:
      if (in.f_mean_n < config.release_threshold_n) {
        if (!s.below_release_since_s) s.below_release_since_s = in.t_s;
        if (in.t_s - *s.below_release_since_s >= config.release_hold_s - kEps) s.finished = true;
      } else {
        s.below_release_since_s.reset();
      }
      break;
  }
  step.phase_changed = s.phase != before;
  return step;
}

}  // namespace gripkit
