#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gripkit/analysis.hpp"
#include "gripkit/error.hpp"
#include "gripkit/simulator.hpp"

using namespace gripkit;

namespace {

ParticipantModel flat_participant(double gain_per_mm) {
  ParticipantModel m;
  m.reflex_gain_per_mm.fill(gain_per_mm);
  return m;
}

}  // namespace

TEST(Rig, StationaryNoiseFreeMatchesForwardModel) {
  RigConfig rig;
  const auto r = rig_step(8.0, 5.0, {}, {}, rig, nullptr, 0.3);
  const ContactState c1 = contact_for(8.0, {}, rig.pads[0], rig);
  const ContactState c2 = contact_for(5.0, {}, rig.pads[1], rig);
  const auto expect = forward_sensor(8.0, 5.0, c1, c2, rig.geometry[0], rig.geometry[1], 0.3);
  EXPECT_DOUBLE_EQ(r.f_m_n, expect.f_m_n);
  EXPECT_DOUBLE_EQ(r.t_m_nm, expect.t_m_nm);
  const auto e = decompose(r, coefficients_from_geometry(rig.geometry[0], rig.geometry[1]));
  EXPECT_NEAR(e.f_grip_1_n, 8.0, 1e-12);
  EXPECT_NEAR(e.f_grip_2_n, 5.0, 1e-12);
}

TEST(Rig, ZeroGripGivesZeroReading) {
  RigConfig rig;
  TactorMotion moving{0.7, 0.0, 6.9, 0.0};
  const auto r = rig_step(0.0, 0.0, moving, moving, rig, nullptr);
  EXPECT_EQ(r.f_m_n, 0.0);
  EXPECT_EQ(r.t_m_nm, 0.0);
}

TEST(Rig, NoiseStreamIndependentOfLevels) {
  RigConfig quiet;
  RigConfig loud;
  loud.sensor_noise_sd_force_n = 0.5;
  Rng a(3), b(3);
  rig_step(5.0, 5.0, {}, {}, quiet, &a);
  rig_step(5.0, 5.0, {}, {}, loud, &b);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Contact, XMotionHasNoArtifact) {
  RigConfig rig;
  const auto c = contact_for(15.0, {1.0, 0.0, 6.883, 0.0}, rig.pads[0], rig);
  EXPECT_DOUBLE_EQ(theoretical_artifact(c, rig.geometry[0]), 0.0);
}

TEST(Contact, YDisplacementShiftsPointOfAction) {
  RigConfig rig;
  // Tactor parked at 1.5 mm: no friction, 3 N on the tactor over a 30 mm arm.
  const auto c = contact_for(15.0, {0.0, 1.5, 0.0, 0.0}, rig.pads[0], rig);
  EXPECT_NEAR(c.f_tactor_n, 3.0, 1e-12);
  EXPECT_NEAR(theoretical_artifact(c, rig.geometry[0]), 0.15, 1e-12);
  EXPECT_NEAR(theoretical_artifact(c, rig.geometry[0]) / 15.0, 0.01, 1e-12);
}

TEST(Contact, FrictionTapersAtLowSpeed) {
  RigConfig rig;
  const auto slow = contact_for(10.0, {0.0, 0.0, 0.0, 0.05}, rig.pads[0], rig);
  const auto fast = contact_for(10.0, {0.0, 0.0, 0.0, 5.0}, rig.pads[0], rig);
  EXPECT_NEAR(slow.f_friction_n, 0.5 * fast.f_friction_n, 1e-12);
  EXPECT_NEAR(fast.f_friction_n, 0.1 * 2.0, 1e-12);
}

TEST(Contact, InvalidPadRejected) {
  RigConfig rig;
  rig.pads[0].tactor_share = 1.5;
  EXPECT_THROW(rig.validate(), Error);
}

TEST(ArtifactRun, YAxisPipelineMatchesClosedForm) {
  SimulationConfig cfg;
  const auto run = simulate_artifact_characterization(Axis::Y, cfg, 15.0, 1.5);
  ASSERT_FALSE(run.t_s.empty());
  double worst = 0.0;
  double peak_pos_ratio = 0.0;
  double peak_pos = 0.0;
  for (std::size_t i = 0; i < run.t_s.size(); ++i) {
    const double a_tm = (run.device_n[i] - run.external_n[i]) / run.external_n[i];
    const double a_t = run.theoretical_artifact_n[i] / run.external_n[i];
    worst = std::max(worst, std::abs(a_tm - a_t));
    if (run.tactor_mm[i] > peak_pos) {
      peak_pos = run.tactor_mm[i];
      peak_pos_ratio = a_tm;
    }
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(peak_pos, 1.5, 0.06);
  // Around 1% at full displacement, within a factor of two.
  EXPECT_GT(std::abs(peak_pos_ratio), 0.005);
  EXPECT_LT(std::abs(peak_pos_ratio), 0.02);
}

TEST(ArtifactRun, XAxisIsArtifactFree) {
  SimulationConfig cfg;
  const auto run = simulate_artifact_characterization(Axis::X, cfg, 15.0, 1.5);
  double moved = 0.0;
  for (std::size_t i = 0; i < run.t_s.size(); ++i) {
    EXPECT_NEAR(run.device_n[i], run.external_n[i], 1e-9);
    moved = std::max(moved, run.tactor_mm[i]);
  }
  EXPECT_GT(moved, 1.4);
}

TEST(ArtifactRun, ReturnsToCentre) {
  SimulationConfig cfg;
  const auto run = simulate_artifact_characterization(Axis::Y, cfg);
  const double band_mm = cfg.actuator.settle_band_counts * cfg.actuator.mm_per_count();
  EXPECT_NEAR(run.tactor_mm.back(), 0.0, band_mm + 1e-9);
  EXPECT_NEAR(run.theoretical_artifact_n.back(), 0.0, 0.01);
}

TEST(Participant, ReflexShapePeaksAtConfiguredTime) {
  ParticipantModel m;
  EXPECT_EQ(m.reflex_shape(0.0), 0.0);
  EXPECT_EQ(m.reflex_shape(-0.1), 0.0);
  EXPECT_NEAR(m.reflex_shape(m.reflex_peak_s), 1.0, 1e-12);
  EXPECT_LT(m.reflex_shape(m.reflex_peak_s - 0.02), 1.0);
  EXPECT_LT(m.reflex_shape(m.reflex_peak_s + 0.02), 1.0);
}

TEST(Participant, Validation) {
  ParticipantModel m;
  m.reflex_gain_per_mm[2] = -0.1;
  EXPECT_THROW(m.validate(), Error);
  ParticipantModel n;
  n.side_bias = 0.0;
  EXPECT_THROW(n.validate(), Error);
}

TEST(SyntheticTrial, CompletesAllPhases) {
  SimulationConfig cfg;
  const auto rec = run_synthetic_trial(TrialCondition{1.0, 5.0}, flat_participant(0.1), cfg, 11);
  EXPECT_TRUE(rec.completed);
  EXPECT_TRUE(rec.usable());
  ASSERT_TRUE(rec.markers.stimulus_onset_s);
  ASSERT_TRUE(rec.markers.stimulus_end_s);
  EXPECT_EQ(rec.samples.front().phase, TrialPhase::RampUp);
  EXPECT_EQ(rec.samples.back().phase, TrialPhase::Released);
  for (std::size_t i = 1; i < rec.samples.size(); ++i) {
    EXPECT_TRUE(legal_transition(rec.samples[i - 1].phase, rec.samples[i].phase));
    EXPECT_NEAR(rec.samples[i].t_s - rec.samples[i - 1].t_s, 0.01, 1e-9);
  }
}

TEST(SyntheticTrial, ReflexTiming) {
  SimulationConfig cfg;
  ParticipantModel m = flat_participant(1.0);
  const double dt = 0.01;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto rec = run_synthetic_trial(TrialCondition{1.5, 5.0}, m, cfg, seed);
    ASSERT_TRUE(rec.markers.stimulus_onset_s);
    const double onset = *rec.markers.stimulus_onset_s;
    std::size_t k0 = 0;
    while (rec.samples[k0].t_s < onset - 1e-9) ++k0;
    const double base = (rec.true_grips[k0][0] + rec.true_grips[k0][1]) / 2.0;
    std::optional<double> first;
    for (std::size_t k = k0; k < rec.samples.size(); ++k) {
      const double g = (rec.true_grips[k][0] + rec.true_grips[k][1]) / 2.0;
      if (g > base + 3.0 * m.motor_noise_sd_n) {
        first = rec.samples[k].t_s;
        break;
      }
    }
    ASSERT_TRUE(first) << seed;
    EXPECT_NEAR(*first, onset + m.reflex_latency_s, dt + 1e-9) << seed;
  }
}

TEST(SyntheticTrial, DeltaPsRecoversReflexAmplitude) {
  SimulationConfig cfg;
  ParticipantModel m = flat_participant(0.1);
  m.reflex_decay_per_s = 1.0;
  double with = 0.0;
  double without = 0.0;
  const int n = 20;
  for (int s = 0; s < n; ++s) {
    with += delta_ps(run_synthetic_trial(TrialCondition{1.5, 5.0}, m, cfg, 100 + s));
    without += delta_ps(run_synthetic_trial(TrialCondition{1.5, 5.0}, flat_participant(0.0), cfg, 100 + s));
  }
  with /= n;
  without /= n;
  // Peak-minus-onset picks up some motor noise on its own.
  EXPECT_LT(without, 0.06);
  EXPECT_NEAR(with - without, 0.15, 0.05);
}

TEST(SyntheticTrial, SameSeedBitIdentical) {
  SimulationConfig cfg;
  cfg.rig.sensor_noise_sd_force_n = 0.02;
  cfg.rig.sensor_noise_sd_torque_nm = 1e-4;
  const auto m = PopulationSpec::paper_shaped_participant();
  const auto a = run_synthetic_trial(TrialCondition{0.5, 7.5}, m, cfg, 42);
  const auto b = run_synthetic_trial(TrialCondition{0.5, 7.5}, m, cfg, 42);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].f_m_n, b.samples[i].f_m_n);
    EXPECT_EQ(a.samples[i].t_m_nm, b.samples[i].t_m_nm);
    EXPECT_EQ(a.samples[i].f_mean_n, b.samples[i].f_mean_n);
    EXPECT_EQ(a.samples[i].phase, b.samples[i].phase);
  }
  const auto c = run_synthetic_trial(TrialCondition{0.5, 7.5}, m, cfg, 43);
  bool differs = c.samples.size() != a.samples.size();
  for (std::size_t i = 0; !differs && i < a.samples.size(); ++i) differs = a.samples[i].f_m_n != c.samples[i].f_m_n;
  EXPECT_TRUE(differs);
}

TEST(SyntheticSession, FollowsPlan) {
  SimulationConfig cfg;
  const auto plan = plan_session(9);
  const auto rec = run_synthetic_session(plan, PopulationSpec::paper_shaped_participant(), cfg, 77);
  ASSERT_EQ(rec.trials.size(), 70u);
  const auto specs = plan.all_trials();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    EXPECT_EQ(rec.trials[i].spec.trial_index, specs[i].trial_index);
    EXPECT_EQ(condition_index(rec.trials[i].spec.condition), condition_index(specs[i].condition));
    EXPECT_TRUE(rec.trials[i].usable());
  }
}

TEST(SyntheticStudy, DeterministicAndSharedPlan) {
  SimulationConfig cfg;
  PopulationSpec pop;
  const auto a = run_synthetic_study(2, pop, cfg, 5);
  const auto b = run_synthetic_study(2, pop, cfg, 5);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].participant, "S01");
  EXPECT_EQ(plan_digest(a[0].plan), plan_digest(a[1].plan));
  for (std::size_t s = 0; s < a.size(); ++s) {
    ASSERT_EQ(a[s].trials.size(), b[s].trials.size());
    for (std::size_t t = 0; t < a[s].trials.size(); ++t) {
      ASSERT_EQ(a[s].trials[t].samples.size(), b[s].trials[t].samples.size());
      EXPECT_EQ(a[s].trials[t].samples.back().f_mean_n, b[s].trials[t].samples.back().f_mean_n);
    }
  }
  EXPECT_THROW(run_synthetic_study(1, pop, cfg, 5), Error);
}

TEST(SyntheticStudy, NoEffectsNoSignificance) {
  SimulationConfig cfg;
  PopulationSpec pop;
  pop.mean.reflex_gain_per_mm.fill(0.0);
  const auto sessions = run_synthetic_study(2, pop, cfg, 21);
  const auto table = build_delta_ps_table(sessions);
  const auto anova = rm_anova_2way(table);
  EXPECT_GT(anova.target.p, 0.05);
  EXPECT_GT(anova.displacement.p, 0.05);
  EXPECT_GT(anova.interaction.p, 0.05);
}

// Without a reflex, a longer stimulus window still lets the max pick up more
// motor noise. That bias must stay far below the reflex effects it competes with.
TEST(SyntheticStudy, ZeroReflexWindowBiasIsSmall) {
  SimulationConfig cfg;
  PopulationSpec pop;
  pop.mean.reflex_gain_per_mm.fill(0.0);
  const auto table = build_delta_ps_table(run_synthetic_study(30, pop, cfg, 5));
  for (std::size_t i = 0; i < 2; ++i) {
    double lo = 0.0, hi = 0.0;
    for (const auto& row : table.values) {
      lo += *row[i][0] / table.n_subjects();
      hi += *row[i][2] / table.n_subjects();
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 0.06);
    EXPECT_LT(std::abs(hi - lo), 0.03);
  }
}

TEST(Sweep, LinearInLoad) {
  RigConfig rig;
  const auto sweep = generate_sweep(Lever::Two, rig, {.points = 5, .max_force_n = 20.0});
  ASSERT_EQ(sweep.samples.size(), 5u);
  EXPECT_NEAR(sweep.samples[4].reading.f_m_n, 20.0 * ReferenceDevice::kRatio2, 1e-9);
  EXPECT_NEAR(sweep.samples[4].reading.t_m_nm, -20.0 * ReferenceDevice::kRatio2 * ReferenceDevice::kD2M, 1e-12);
  EXPECT_THROW(generate_sweep(Lever::One, rig, {.points = 1}), Error);
}
