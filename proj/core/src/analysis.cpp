#include "gripkit/analysis.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <numeric>

#include "gripkit/csv.hpp"
#include "gripkit/distributions.hpp"
#include "gripkit/error.hpp"

namespace gripkit {

namespace {

constexpr double kTimeEps = 1e-6;
constexpr double kDegenerateRel = 1e-12;

using Matrix = std::vector<std::vector<double>>;

std::string subject_label(const SessionRecording& s) {
  return s.participant.empty() ? s.session_id : s.participant;
}

std::optional<std::size_t> sample_at(const TrialRecord& trial, double t_s) {
  for (std::size_t i = 0; i < trial.samples.size(); ++i) {
    if (std::abs(trial.samples[i].t_s - t_s) < kTimeEps) return i;
    if (trial.samples[i].t_s > t_s) break;
  }
  return std::nullopt;
}

// Rows are orthonormal contrasts among k levels (normalised Helmert).
Matrix helmert(std::size_t k) {
  Matrix c(k - 1, std::vector<double>(k, 0.0));
  for (std::size_t r = 1; r < k; ++r) {
    const double norm = std::sqrt(static_cast<double>(r * (r + 1)));
    for (std::size_t j = 0; j < r; ++j) c[r - 1][j] = 1.0 / norm;
    c[r - 1][r] = -static_cast<double>(r) / norm;
  }
  return c;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.size() * b.size(), std::vector<double>(a[0].size() * b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k)
        for (std::size_t l = 0; l < b[0].size(); ++l)
          out[i * b.size() + k][j * b[0].size() + l] = a[i][j] * b[k][l];
  return out;
}

// Greenhouse-Geisser epsilon of contrasts `c` over per-subject vectors.
double gg_epsilon(const Matrix& c, const Matrix& per_subject) {
  const std::size_t n = per_subject.size();
  const std::size_t m = c[0].size();
  const std::size_t q = c.size();
  std::vector<double> mean(m, 0.0);
  for (const auto& v : per_subject)
    for (std::size_t j = 0; j < m; ++j) mean[j] += v[j] / static_cast<double>(n);
  // Contrast scores per subject, then their covariance.
  Matrix scores(n, std::vector<double>(q, 0.0));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t r = 0; r < q; ++r)
      for (std::size_t j = 0; j < m; ++j) scores[s][r] += c[r][j] * (per_subject[s][j] - mean[j]);
  Matrix cov(q, std::vector<double>(q, 0.0));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t r = 0; r < q; ++r)
      for (std::size_t u = 0; u < q; ++u) cov[r][u] += scores[s][r] * scores[s][u] / static_cast<double>(n - 1);
  double trace = 0.0, trace_sq = 0.0;
  for (std::size_t r = 0; r < q; ++r) {
    trace += cov[r][r];
    for (std::size_t u = 0; u < q; ++u) trace_sq += cov[r][u] * cov[u][r];
  }
  if (trace_sq <= 0.0) return 1.0;
  const double eps = trace * trace / (static_cast<double>(q) * trace_sq);
  return std::clamp(eps, 1.0 / static_cast<double>(q), 1.0);
}

EffectResult test_effect(double ss, double df, double error_ss, double error_df, double ss_total, double epsilon) {
  EffectResult e;
  e.ss = ss;
  e.df_num = df;
  e.df_den = error_df;
  e.error_ss = error_ss;
  e.ms = ss / df;
  e.error_ms = error_ss / error_df;
  e.epsilon = epsilon;
  const double floor = kDegenerateRel * ss_total;
  if (ss_total <= 0.0 || error_ss <= floor) {
    e.degenerate = true;
    if (ss_total <= 0.0 || ss <= floor) {
      e.f = 0.0;
      e.p = 1.0;
    } else {
      e.f = std::numeric_limits<double>::infinity();
      e.p = 0.0;
      e.p_below_floor = true;
    }
    return e;
  }
  e.f = e.ms / e.error_ms;
  e.p = stats::f_survival(e.f, df * epsilon, error_df * epsilon);
  if (e.p < DBL_MIN) {
    e.p = 0.0;
    e.p_below_floor = true;
  }
  return e;
}

}  // namespace

double delta_ps(const TrialRecord& trial) {
  const auto& m = trial.markers;
  if (!m.stimulus_onset_s || !m.stimulus_end_s) {
    throw Error(ErrorCategory::MissingMarkers, "trial " + std::to_string(trial.spec.trial_index) +
                                                   " has no stimulus markers");
  }
  std::optional<double> onset_value;
  double peak = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (const auto& s : trial.samples) {
    if (s.t_s < *m.stimulus_onset_s - kTimeEps) continue;
    if (s.t_s > *m.stimulus_end_s + kTimeEps) break;
    if (!onset_value) onset_value = s.f_mean_n;
    peak = std::max(peak, s.f_mean_n);
    ++count;
  }
  if (count < 3) {
    throw Error(ErrorCategory::WindowTooShort, "stimulus window of trial " + std::to_string(trial.spec.trial_index) +
                                                   " has " + std::to_string(count) + " samples");
  }
  return peak - *onset_value;
}

bool DeltaPsTable::complete() const noexcept {
  if (values.size() != subjects.size()) return false;
  for (const auto& cells : values)
    for (const auto& row : cells)
      for (const auto& c : row)
        if (!c) return false;
  return true;
}

void DeltaPsTable::require_complete() const {
  if (values.size() != subjects.size()) {
    throw Error(ErrorCategory::IncompleteTable, "table has mismatched subject and value rows");
  }
  for (std::size_t s = 0; s < values.size(); ++s)
    for (std::size_t i = 0; i < kTargetForcesN.size(); ++i)
      for (std::size_t j = 0; j < kDisplacementsMm.size(); ++j)
        if (!values[s][i][j]) {
          throw Error(ErrorCategory::IncompleteTable,
                      "missing cell for subject " + subjects[s] + " at " +
                          condition_label({kDisplacementsMm[j], kTargetForcesN[i]}));
        }
}

double DeltaPsTable::at(std::size_t subject, std::size_t target, std::size_t displacement) const {
  const auto& c = values.at(subject).at(target).at(displacement);
  if (!c) throw Error(ErrorCategory::IncompleteTable, "missing cell");
  return *c;
}

DeltaPsTable DeltaPsTable::from_values(std::vector<std::string> subjects,
                                       const std::vector<std::array<std::array<double, 3>, 2>>& values) {
  DeltaPsTable t;
  t.subjects = std::move(subjects);
  for (const auto& v : values) {
    Cells cells;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) cells[i][j] = v[i][j];
    t.values.push_back(cells);
  }
  return t;
}

DeltaPsTable build_delta_ps_table(std::span<const SessionRecording> sessions, const TableOptions& options) {
  DeltaPsTable table;
  for (const auto& session : sessions) {
    std::array<std::array<std::pair<double, int>, 3>, 2> acc{};
    for (const auto& trial : session.trials) {
      if (trial.spec.training && !options.include_training) continue;
      if (!trial.usable()) continue;
      try {
        const double d = delta_ps(trial);
        auto& cell = acc[target_level(trial.spec.condition)][displacement_level(trial.spec.condition)];
        cell.first += d;
        ++cell.second;
      } catch (const Error& e) {
        table.warnings.push_back(subject_label(session) + ": skipped trial " +
                                 std::to_string(trial.spec.trial_index) + ": " + e.what());
      }
    }
    DeltaPsTable::Cells cells;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (acc[i][j].second > 0) cells[i][j] = acc[i][j].first / acc[i][j].second;
    table.subjects.push_back(subject_label(session));
    table.values.push_back(cells);
  }
  return table;
}

AnovaResult rm_anova_2way(const DeltaPsTable& table, const AnovaOptions& options) {
  table.require_complete();
  const std::size_t n = table.n_subjects();
  if (n < 2) throw Error(ErrorCategory::InvalidArgument, "repeated-measures ANOVA needs at least two subjects");
  constexpr std::size_t a = kTargetForcesN.size();
  constexpr std::size_t b = kDisplacementsMm.size();
  const double dn = static_cast<double>(n);

  // Work on deviations from the grand mean so large offsets do not cost precision.
  double g = 0.0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j) g += table.at(s, i, j);
  g /= dn * a * b;
  std::vector<std::array<std::array<double, b>, a>> y(n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j) y[s][i][j] = table.at(s, i, j) - g;

  std::vector<double> ms(n, 0.0);
  std::array<double, a> ma{};
  std::array<double, b> mb{};
  std::array<std::array<double, b>, a> mab{};
  std::vector<std::array<double, a>> msa(n);
  std::vector<std::array<double, b>> msb(n);
  for (std::size_t s = 0; s < n; ++s) {
    msa[s].fill(0.0);
    msb[s].fill(0.0);
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j) {
        const double v = y[s][i][j];
        ms[s] += v / (a * b);
        ma[i] += v / (dn * b);
        mb[j] += v / (dn * a);
        mab[i][j] += v / dn;
        msa[s][i] += v / b;
        msb[s][j] += v / a;
      }
  }
  double gm = 0.0;  // ~0 after centering, kept for exactness
  for (std::size_t s = 0; s < n; ++s) gm += ms[s] / dn;

  AnovaResult r;
  r.n_subjects = n;
  double ss_a = 0, ss_b = 0, ss_ab = 0, ss_as = 0, ss_bs = 0, ss_abs = 0;
  for (std::size_t s = 0; s < n; ++s) {
    r.ss_subject += a * b * (ms[s] - gm) * (ms[s] - gm);
    for (std::size_t i = 0; i < a; ++i) {
      const double d = msa[s][i] - ms[s] - ma[i] + gm;
      ss_as += b * d * d;
    }
    for (std::size_t j = 0; j < b; ++j) {
      const double d = msb[s][j] - ms[s] - mb[j] + gm;
      ss_bs += a * d * d;
    }
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j) {
        const double tot = y[s][i][j] - gm;
        r.ss_total += tot * tot;
        const double d = y[s][i][j] - msa[s][i] - msb[s][j] - mab[i][j] + ms[s] + ma[i] + mb[j] - gm;
        ss_abs += d * d;
      }
  }
  for (std::size_t i = 0; i < a; ++i) ss_a += dn * b * (ma[i] - gm) * (ma[i] - gm);
  for (std::size_t j = 0; j < b; ++j) ss_b += dn * a * (mb[j] - gm) * (mb[j] - gm);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      const double d = mab[i][j] - ma[i] - mb[j] + gm;
      ss_ab += dn * d * d;
    }

  const double df_a = a - 1.0, df_b = b - 1.0, df_ab = df_a * df_b;
  double eps_a = 1.0, eps_b = 1.0, eps_ab = 1.0;
  if (options.greenhouse_geisser) {
    Matrix per_a(n), per_b(n), per_ab(n);
    for (std::size_t s = 0; s < n; ++s) {
      per_a[s].assign(msa[s].begin(), msa[s].end());
      per_b[s].assign(msb[s].begin(), msb[s].end());
      for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) per_ab[s].push_back(y[s][i][j]);
    }
    eps_a = gg_epsilon(helmert(a), per_a);
    eps_b = gg_epsilon(helmert(b), per_b);
    eps_ab = gg_epsilon(kron(helmert(a), helmert(b)), per_ab);
    r.sphericity_corrected = true;
  }
  const double dfe = dn - 1.0;
  r.target = test_effect(ss_a, df_a, ss_as, df_a * dfe, r.ss_total, eps_a);
  r.displacement = test_effect(ss_b, df_b, ss_bs, df_b * dfe, r.ss_total, eps_b);
  r.interaction = test_effect(ss_ab, df_ab, ss_abs, df_ab * dfe, r.ss_total, eps_ab);
  return r;
}

std::vector<double> holm_adjust(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p[x] < p[y]; });
  std::vector<double> adj(p.size(), 1.0);
  double running = 0.0;
  const double m = static_cast<double>(p.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    running = std::max(running, std::min(1.0, (m - static_cast<double>(rank)) * p[order[rank]]));
    adj[order[rank]] = running;
  }
  return adj;
}

ComparisonResult holm_planned_comparisons(const DeltaPsTable& table, const AnovaResult& anova) {
  table.require_complete();
  constexpr std::size_t levels = kDisplacementsMm.size();
  if (levels < 2) throw Error(ErrorCategory::InvalidArgument, "comparisons need at least two levels");
  const std::size_t n = table.n_subjects();
  if (n < 2 || anova.n_subjects != n) {
    throw Error(ErrorCategory::InvalidArgument, "ANOVA result does not match the table");
  }

  ComparisonResult out;
  const double ss1 = anova.displacement.error_ss;
  const double ss2 = anova.interaction.error_ss;
  const double df1 = anova.displacement.df_den;
  const double df2 = anova.interaction.df_den;
  out.ms_pool = (ss1 + ss2) / (df1 + df2);
  const double denom = ss1 * ss1 / df1 + ss2 * ss2 / df2;
  out.df_pool = denom > 0.0 ? (ss1 + ss2) * (ss1 + ss2) / denom : df1 + df2;
  const double se = std::sqrt(2.0 * out.ms_pool / static_cast<double>(n));
  out.degenerate = !(se > 0.0) || ss1 + ss2 <= kDegenerateRel * anova.ss_total;

  std::vector<double> raw;
  for (std::size_t i = 0; i < kTargetForcesN.size(); ++i) {
    for (std::size_t lo = 0; lo + 1 < levels; ++lo) {
      const std::size_t hi = lo + 1;
      double m_lo = 0.0, m_hi = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        m_lo += table.at(s, i, lo) / static_cast<double>(n);
        m_hi += table.at(s, i, hi) / static_cast<double>(n);
      }
      Comparison c;
      c.target_level = i;
      c.low_level = lo;
      c.high_level = hi;
      c.label = format_fixed(kTargetForcesN[i], 1) + " N: " + format_fixed(kDisplacementsMm[hi], 1) + " vs " +
                format_fixed(kDisplacementsMm[lo], 1) + " mm";
      c.delta_n = m_hi - m_lo;
      c.df = out.df_pool;
      if (out.degenerate) {
        c.t = c.delta_n == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.delta_n);
        c.p_raw = c.delta_n == 0.0 ? 1.0 : 0.0;
      } else {
        c.t = c.delta_n / se;
        c.p_raw = stats::t_two_sided(c.t, c.df);
      }
      raw.push_back(c.p_raw);
      out.pairs.push_back(c);
    }
  }
  const auto adj = holm_adjust(raw);
  for (std::size_t k = 0; k < out.pairs.size(); ++k) out.pairs[k].p_holm = adj[k];
  return out;
}

AverageTrace average_traces(std::span<const AlignedTrace> traces, double dt_s) {
  if (traces.size() < 2) throw Error(ErrorCategory::InvalidArgument, "averaging needs at least two traces");
  std::size_t before = SIZE_MAX, after = SIZE_MAX;
  for (const auto& tr : traces) {
    if (tr.onset_index >= tr.values.size()) {
      throw Error(ErrorCategory::InvalidArgument, "onset index outside trace");
    }
    before = std::min(before, tr.onset_index);
    after = std::min(after, tr.values.size() - tr.onset_index);
  }
  const std::size_t len = before + after;

  AverageTrace out;
  std::size_t worst_trim = 0;
  std::size_t worst_len = 1;
  for (const auto& tr : traces) {
    const std::size_t trimmed = tr.values.size() - len;
    if (trimmed * worst_len > worst_trim * tr.values.size()) {
      worst_trim = trimmed;
      worst_len = tr.values.size();
    }
  }
  if (static_cast<double>(worst_trim) > 0.2 * static_cast<double>(worst_len)) {
    out.warnings.push_back("ragged traces: up to " + std::to_string(100 * worst_trim / worst_len) +
                           "% of a trace trimmed to common support");
  }

  // Subject means first.
  std::map<std::string, std::pair<std::vector<double>, int>> per_subject;
  for (const auto& tr : traces) {
    auto& [sum, count] = per_subject[tr.subject];
    if (sum.empty()) sum.assign(len, 0.0);
    const std::size_t start = tr.onset_index - before;
    for (std::size_t k = 0; k < len; ++k) sum[k] += tr.values[start + k];
    ++count;
  }
  const std::size_t n = per_subject.size();
  out.n_subjects = n;
  out.t_s.resize(len);
  out.mean.assign(len, 0.0);
  out.se.assign(len, 0.0);
  for (std::size_t k = 0; k < len; ++k) {
    out.t_s[k] = (static_cast<double>(k) - static_cast<double>(before)) * dt_s;
  }
  for (const auto& [_, entry] : per_subject) {
    for (std::size_t k = 0; k < len; ++k) out.mean[k] += entry.first[k] / entry.second / static_cast<double>(n);
  }
  if (n >= 2) {
    for (const auto& [_, entry] : per_subject) {
      for (std::size_t k = 0; k < len; ++k) {
        const double d = entry.first[k] / entry.second - out.mean[k];
        out.se[k] += d * d;
      }
    }
    for (auto& v : out.se) v = std::sqrt(v / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  } else {
    out.warnings.push_back("single subject: standard error is zero");
  }
  return out;
}

std::vector<AverageTrace> condition_average(std::span<const SessionRecording> sessions,
                                            const AverageOptions& options) {
  std::vector<std::vector<AlignedTrace>> groups(kConditionCount);
  for (const auto& session : sessions) {
    for (const auto& trial : session.trials) {
      if ((trial.spec.training && !options.include_training) || !trial.usable()) continue;
      if (!trial.markers.stimulus_onset_s || trial.samples.empty()) continue;
      const auto onset = sample_at(trial, *trial.markers.stimulus_onset_s);
      if (!onset) continue;
      const double t0 = *trial.markers.stimulus_onset_s;
      AlignedTrace tr;
      tr.subject = subject_label(session);
      std::size_t first = SIZE_MAX;
      for (std::size_t i = 0; i < trial.samples.size(); ++i) {
        const double t = trial.samples[i].t_s;
        if (t < t0 - options.pre_s - kTimeEps || t > t0 + options.post_s + kTimeEps) continue;
        if (first == SIZE_MAX) first = i;
        tr.values.push_back(trial.samples[i].f_mean_n);
      }
      tr.onset_index = *onset - first;
      groups[condition_index(trial.spec.condition)].push_back(std::move(tr));
    }
  }
  std::vector<AverageTrace> out;
  for (std::size_t c = 0; c < kConditionCount; ++c) {
    AverageTrace avg;
    if (groups[c].size() >= 2) {
      avg = average_traces(groups[c]);
    } else {
      avg.warnings.push_back("fewer than two trials; no average");
    }
    avg.label = condition_label(all_conditions()[c]);
    out.push_back(std::move(avg));
  }
  return out;
}

SideSplitResult stable_phase_side_split(const SessionRecording& session, double window_s, bool include_training) {
  SideSplitResult out;
  std::array<std::array<double, 2>, kTargetForcesN.size()> sums{};
  for (std::size_t i = 0; i < kTargetForcesN.size(); ++i) out.per_target[i].target_force_n = kTargetForcesN[i];
  for (const auto& trial : session.trials) {
    if ((trial.spec.training && !include_training) || !trial.usable()) continue;
    if (!trial.markers.stimulus_onset_s || trial.samples.empty()) continue;
    const double onset = *trial.markers.stimulus_onset_s;
    if (onset - window_s < trial.samples.front().t_s - kTimeEps) {
      out.warnings.push_back("trial " + std::to_string(trial.spec.trial_index) +
                             ": pre-stimulus window starts before the recording");
      continue;
    }
    double f1 = 0.0, f2 = 0.0;
    int count = 0;
    for (const auto& s : trial.samples) {
      if (s.t_s < onset - window_s - kTimeEps) continue;
      if (s.t_s >= onset - kTimeEps) break;
      f1 += s.f_grip_1_n;
      f2 += s.f_grip_2_n;
      ++count;
    }
    if (count == 0) continue;
    const std::size_t level = target_level(trial.spec.condition);
    sums[level][0] += f1 / count;
    sums[level][1] += f2 / count;
    ++out.per_target[level].trials;
  }
  for (std::size_t i = 0; i < kTargetForcesN.size(); ++i) {
    auto& p = out.per_target[i];
    if (p.trials > 0) {
      p.finger_mean_n = sums[i][0] / static_cast<double>(p.trials);
      p.thumb_mean_n = sums[i][1] / static_cast<double>(p.trials);
    }
  }
  return out;
}

}  // namespace gripkit
