#pragma once

namespace decenergy {

// Regularized incomplete beta function I_x(a, b), for a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double x, double a, double b);

// Two-sided tail mass P(|T| >= t) of the central Student t distribution.
double student_t_two_sided_tail(double t, double df);

double student_t_pdf(double t, double df);

// Two-sided critical value: the t > 0 with P(-t < T < t) = confidence.
// Requires 0 < confidence < 1 and df >= 1; throws InvalidInput otherwise.
double t_critical(double confidence, int df);

}  // namespace decenergy
