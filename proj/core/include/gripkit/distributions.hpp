#pragma once

namespace gripkit::stats {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(F > f) for F(d1, d2).
double f_survival(double f, double d1, double d2);

/// Two-sided P(|T| > |t|) for Student's t with real-valued df.
double t_two_sided(double t, double df);

}  // namespace gripkit::stats
