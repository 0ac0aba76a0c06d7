#include <gtest/gtest.h>

#include <cmath>

#include "gripkit/analysis.hpp"
#include "gripkit/error.hpp"
#include "gripkit/rng.hpp"

using namespace gripkit;

namespace {

// Four subjects, target (5, 7.5 N) x displacement (0.5, 1.0, 1.5 mm).
DeltaPsTable hand_table() {
  return DeltaPsTable::from_values({"S1", "S2", "S3", "S4"},
                                   {{{{0.10, 0.15, 0.22}, {0.06, 0.10, 0.11}}},
                                    {{{0.08, 0.14, 0.25}, {0.05, 0.09, 0.10}}},
                                    {{{0.12, 0.18, 0.20}, {0.07, 0.12, 0.12}}},
                                    {{{0.09, 0.11, 0.19}, {0.04, 0.08, 0.10}}}});
}

// Reference values from tests/oracle/anova_oracle.py.
constexpr double kSsTotal = 0.06729583333333336;
constexpr double kSsSubject = 0.0034458333333333346;
constexpr double kSsA = 0.026004166666666662;
constexpr double kSsB = 0.028933333333333339;
constexpr double kSsAB = 0.005233333333333326;
constexpr double kSsAS = 0.00031250000000000017;
constexpr double kSsBS = 0.0018666666666666653;
constexpr double kSsABS = 0.001499999999999997;

TrialRecord ramp_trial(std::vector<double> f, double onset, double end) {
  TrialRecord t;
  t.spec = TrialSpec{{1.0, 5.0}, 2.0, 0, 12, false};
  for (std::size_t k = 0; k < f.size(); ++k) {
    TrialSample s;
    s.t_s = 0.01 * static_cast<double>(k);
    s.f_mean_n = f[k];
    s.f_grip_1_n = f[k] * 1.1;
    s.f_grip_2_n = f[k] * 0.9;
    t.samples.push_back(s);
  }
  t.markers.stimulus_onset_s = onset;
  t.markers.stimulus_end_s = end;
  t.completed = true;
  return t;
}

}  // namespace

TEST(DeltaPs, PeakMinusOnset) {
  auto t = ramp_trial({5.0, 5.0, 5.1, 5.3, 5.2, 4.9, 9.0}, 0.01, 0.05);
  EXPECT_NEAR(delta_ps(t), 0.3, 1e-12);
}

TEST(DeltaPs, CanBeZeroButNotNegative) {
  auto t = ramp_trial({5.0, 5.0, 4.9, 4.8, 4.7}, 0.01, 0.04);
  EXPECT_EQ(delta_ps(t), 0.0);
}

TEST(DeltaPs, Errors) {
  auto t = ramp_trial({5.0, 5.0, 5.1}, 0.0, 0.02);
  t.markers.stimulus_end_s.reset();
  try {
    delta_ps(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::MissingMarkers);
  }
  auto shortw = ramp_trial({5.0, 5.0, 5.1, 5.2}, 0.01, 0.02);
  try {
    delta_ps(shortw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::WindowTooShort);
  }
}

TEST(Anova, SumsOfSquaresMatchOracle) {
  const auto r = rm_anova_2way(hand_table());
  EXPECT_NEAR(r.ss_total, kSsTotal, 1e-12);
  EXPECT_NEAR(r.ss_subject, kSsSubject, 1e-12);
  EXPECT_NEAR(r.target.ss, kSsA, 1e-12);
  EXPECT_NEAR(r.displacement.ss, kSsB, 1e-12);
  EXPECT_NEAR(r.interaction.ss, kSsAB, 1e-12);
  EXPECT_NEAR(r.target.error_ss, kSsAS, 1e-12);
  EXPECT_NEAR(r.displacement.error_ss, kSsBS, 1e-12);
  EXPECT_NEAR(r.interaction.error_ss, kSsABS, 1e-12);
  const double parts = r.ss_subject + r.target.ss + r.displacement.ss + r.interaction.ss + r.target.error_ss +
                       r.displacement.error_ss + r.interaction.error_ss;
  EXPECT_NEAR(parts, r.ss_total, 1e-12);
}

TEST(Anova, FAndPMatchOracle) {
  const auto r = rm_anova_2way(hand_table());
  EXPECT_EQ(r.n_subjects, 4u);
  EXPECT_EQ(r.target.df_num, 1.0);
  EXPECT_EQ(r.target.df_den, 3.0);
  EXPECT_EQ(r.displacement.df_num, 2.0);
  EXPECT_EQ(r.displacement.df_den, 6.0);
  EXPECT_EQ(r.interaction.df_den, 6.0);
  EXPECT_NEAR(r.target.f, 249.63999999999982, 1e-6);
  EXPECT_NEAR(r.target.p, 0.00055115256544505434, 1e-6);
  EXPECT_NEAR(r.displacement.f, 46.500000000000036, 1e-6);
  EXPECT_NEAR(r.displacement.p, 0.00022261179285972622, 1e-6);
  EXPECT_NEAR(r.interaction.f, 10.466666666666672, 1e-6);
  EXPECT_NEAR(r.interaction.p, 0.011055628403738313, 1e-6);
  EXPECT_FALSE(r.degenerate());
  EXPECT_FALSE(r.sphericity_corrected);
}

TEST(Anova, GreenhouseGeisserMatchesOracle) {
  const auto r = rm_anova_2way(hand_table(), {.greenhouse_geisser = true});
  EXPECT_TRUE(r.sphericity_corrected);
  EXPECT_EQ(r.target.epsilon, 1.0);
  EXPECT_NEAR(r.displacement.epsilon, 0.6956521739130439, 1e-9);
  EXPECT_NEAR(r.displacement.p, 0.0017008431978914609, 1e-6);
  EXPECT_NEAR(r.interaction.epsilon, 0.6261595547309835, 1e-9);
  EXPECT_NEAR(r.interaction.p, 0.032837804160650325, 1e-6);
  // F itself is unchanged by the correction.
  EXPECT_NEAR(r.displacement.f, 46.5, 1e-9);
}

TEST(Anova, DegenerateErrorTerm) {
  // Purely additive data: every effect-by-subject term vanishes.
  std::vector<std::array<std::array<double, 3>, 2>> v;
  for (double s : {0.0, 0.1, 0.2}) v.push_back({{{s + 0.1, s + 0.2, s + 0.3}, {s + 0.0, s + 0.1, s + 0.2}}});
  const auto table = DeltaPsTable::from_values({"a", "b", "c"}, v);
  const auto r = rm_anova_2way(table);
  EXPECT_TRUE(r.degenerate());
  EXPECT_TRUE(r.target.degenerate);
  EXPECT_TRUE(std::isinf(r.target.f));
  EXPECT_EQ(r.target.p, 0.0);
  // No interaction effect and no error: F undefined, reported as no effect.
  EXPECT_TRUE(r.interaction.degenerate);
  EXPECT_EQ(r.interaction.p, 1.0);
  const auto c = holm_planned_comparisons(table, r);
  EXPECT_TRUE(c.degenerate);
  for (const auto& pair : c.pairs) {
    EXPECT_TRUE(std::isinf(pair.t));
    EXPECT_EQ(pair.p_holm, 0.0);
  }
}

TEST(Anova, ConstantTableIsDegenerate) {
  std::vector<std::array<std::array<double, 3>, 2>> v(3, {{{0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}}});
  const auto r = rm_anova_2way(DeltaPsTable::from_values({"a", "b", "c"}, v));
  EXPECT_TRUE(r.degenerate());
  EXPECT_EQ(r.displacement.p, 1.0);
  EXPECT_FALSE(std::isnan(r.displacement.f));
}

TEST(Anova, RequiresTwoCompleteSubjects) {
  auto one = DeltaPsTable::from_values({"a"}, {{{{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}}}});
  EXPECT_THROW(rm_anova_2way(one), Error);
  auto table = hand_table();
  table.values[2][1][2].reset();
  try {
    rm_anova_2way(table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::IncompleteTable);
  }
}

TEST(Anova, ShiftInvariant) {
  auto base = hand_table();
  std::vector<std::array<std::array<double, 3>, 2>> v;
  for (std::size_t s = 0; s < 4; ++s) {
    std::array<std::array<double, 3>, 2> cells{};
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) cells[i][j] = base.at(s, i, j) + 1e6;
    v.push_back(cells);
  }
  const auto r = rm_anova_2way(DeltaPsTable::from_values(base.subjects, v));
  EXPECT_NEAR(r.target.f, 249.64, 1e-3);
  EXPECT_NEAR(r.interaction.f, 10.4667, 1e-3);
}

TEST(Holm, StepDown) {
  const std::vector<double> p{0.01, 0.04, 0.03, 0.005};
  const auto adj = holm_adjust(p);
  EXPECT_NEAR(adj[3], 0.02, 1e-15);
  EXPECT_NEAR(adj[0], 0.03, 1e-15);
  EXPECT_NEAR(adj[2], 0.06, 1e-15);
  EXPECT_NEAR(adj[1], 0.06, 1e-15);
}

TEST(Holm, MonotoneAndCapped) {
  const std::vector<double> p{0.9, 0.5, 0.001, 0.2, 0.3};
  const auto adj = holm_adjust(p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_GE(adj[i], p[i]);
    EXPECT_LE(adj[i], 1.0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[i] < p[j]) EXPECT_LE(adj[i], adj[j]);
    }
  }
  EXPECT_TRUE(holm_adjust(std::vector<double>{}).empty());
}

TEST(PlannedComparisons, MatchOracle) {
  const auto table = hand_table();
  const auto c = holm_planned_comparisons(table, rm_anova_2way(table));
  ASSERT_EQ(c.pairs.size(), 4u);
  EXPECT_NEAR(c.df_pool, 11.859329587289283, 1e-9);
  struct Row {
    double delta, t, p, holm;
  };
  const Row rows[] = {
      {0.0475, 4.010506004962668, 0.0017687020684918056, 0.0053061062054754167},
      {0.07, 5.9102193757344512, 7.4898879608781049e-05, 0.0002995955184351242},
      {0.0425, 3.5883474781244913, 0.0037919099545463716, 0.0075838199090927432},
      {0.01, 0.84431705367635157, 0.41519987273545644, 0.41519987273545644},
  };
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(c.pairs[k].delta_n, rows[k].delta, 1e-12) << k;
    EXPECT_NEAR(c.pairs[k].t, rows[k].t, 1e-6) << k;
    EXPECT_NEAR(c.pairs[k].p_raw, rows[k].p, 1e-6) << k;
    EXPECT_NEAR(c.pairs[k].p_holm, rows[k].holm, 1e-6) << k;
  }
  EXPECT_EQ(c.pairs[0].label, "5.0 N: 1.0 vs 0.5 mm");
  EXPECT_EQ(c.pairs[3].label, "7.5 N: 1.5 vs 1.0 mm");
}

TEST(PlannedComparisons, TenSubjectPoolDf) {
  std::vector<std::array<std::array<double, 3>, 2>> v;
  std::vector<std::string> names;
  Rng rng(44);
  for (int s = 0; s < 10; ++s) {
    auto u = [&] { return 0.02 * (rng.uniform() - 0.5); };
    v.push_back({{{0.1 + u(), 0.2 + u(), 0.3 + u()}, {0.1 + u(), 0.25 + u(), 0.3 + u()}}});
    names.push_back("S" + std::to_string(s));
  }
  const auto table = DeltaPsTable::from_values(names, v);
  const auto r = rm_anova_2way(table);
  EXPECT_EQ(r.target.df_den, 9.0);
  EXPECT_EQ(r.displacement.df_den, 18.0);
  EXPECT_EQ(r.interaction.df_den, 18.0);
  const auto c = holm_planned_comparisons(table, r);
  EXPECT_GT(c.df_pool, 18.0);
  EXPECT_LE(c.df_pool, 36.0 + 1e-9);
}

TEST(AverageTraces, SubjectMeansThenAcrossSubjects) {
  std::vector<AlignedTrace> traces{
      {"A", {1.0, 2.0, 3.0}, 1},
      {"A", {3.0, 4.0, 5.0}, 1},
      {"B", {0.0, 0.0, 1.0, 1.0}, 2},
  };
  const auto avg = average_traces(traces);
  EXPECT_EQ(avg.n_subjects, 2u);
  ASSERT_EQ(avg.mean.size(), 3u);
  EXPECT_NEAR(avg.t_s[0], -0.01, 1e-12);
  EXPECT_NEAR(avg.t_s[1], 0.0, 1e-12);
  // A: {2, 3, 4}; B aligned: {0, 1, 1}.
  EXPECT_NEAR(avg.mean[0], 1.0, 1e-12);
  EXPECT_NEAR(avg.mean[1], 2.0, 1e-12);
  EXPECT_NEAR(avg.mean[2], 2.5, 1e-12);
  EXPECT_NEAR(avg.se[0], std::sqrt(2.0 / 1.0) / std::sqrt(2.0), 1e-12);
}

TEST(AverageTraces, WarnsOnHeavyTrim) {
  std::vector<AlignedTrace> traces{{"A", std::vector<double>(100, 1.0), 50}, {"B", {1.0, 1.0, 1.0}, 1}};
  const auto avg = average_traces(traces);
  EXPECT_EQ(avg.mean.size(), 3u);
  EXPECT_FALSE(avg.warnings.empty());
}

TEST(AverageTraces, SingleSubjectWarns) {
  std::vector<AlignedTrace> traces{{"A", {1.0, 2.0}, 0}, {"A", {3.0, 4.0}, 0}};
  const auto avg = average_traces(traces);
  EXPECT_EQ(avg.n_subjects, 1u);
  EXPECT_EQ(avg.se[0], 0.0);
  EXPECT_FALSE(avg.warnings.empty());
  EXPECT_THROW(average_traces(std::vector<AlignedTrace>{{"A", {1.0}, 0}}), Error);
  EXPECT_THROW(average_traces(std::vector<AlignedTrace>{{"A", {1.0}, 3}, {"B", {1.0}, 0}}), Error);
}

TEST(SideSplit, PreStimulusSecond) {
  SessionRecording rec;
  std::vector<double> f(300, 5.0);
  auto t = ramp_trial(f, 2.0, 2.4);
  rec.trials.push_back(t);
  auto early = ramp_trial(f, 0.5, 0.9);
  early.spec.trial_index = 13;
  rec.trials.push_back(early);
  const auto split = stable_phase_side_split(rec);
  EXPECT_EQ(split.per_target[0].trials, 1u);
  EXPECT_NEAR(split.per_target[0].finger_mean_n, 5.5, 1e-12);
  EXPECT_NEAR(split.per_target[0].thumb_mean_n, 4.5, 1e-12);
  EXPECT_EQ(split.per_target[1].trials, 0u);
  EXPECT_EQ(split.warnings.size(), 1u);
}

TEST(DeltaPsTableBuild, SkipsTrainingAndWarns) {
  SessionRecording rec;
  rec.participant = "P7";
  for (std::size_t c = 0; c < kConditionCount; ++c) {
    auto t = ramp_trial({5.0, 5.0, 5.2, 5.1, 5.0}, 0.01, 0.04);
    t.spec.condition = all_conditions()[c];
    t.spec.trial_index = static_cast<int>(c);
    rec.trials.push_back(t);
  }
  auto training = ramp_trial({5.0, 5.0, 9.0, 9.0}, 0.01, 0.03);
  training.spec.training = true;
  rec.trials.push_back(training);
  auto broken = ramp_trial({5.0, 5.0, 5.0}, 0.01, 0.03);
  broken.markers.stimulus_onset_s.reset();
  rec.trials.push_back(broken);

  const std::vector<SessionRecording> sessions{rec};
  const auto table = build_delta_ps_table(sessions);
  ASSERT_EQ(table.n_subjects(), 1u);
  EXPECT_EQ(table.subjects[0], "P7");
  EXPECT_TRUE(table.complete());
  EXPECT_NEAR(table.at(0, 0, 0), 0.2, 1e-12);
  EXPECT_EQ(table.warnings.size(), 1u);
}
