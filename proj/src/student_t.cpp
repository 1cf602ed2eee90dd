#include "decenergy/student_t.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "decenergy/errors.hpp"

namespace decenergy {

namespace {

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double incomplete_beta_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxTerms = 10000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw InvalidInput("incomplete beta arguments out of domain");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * incomplete_beta_fraction(x, a, b) / a;
  return 1.0 - front * incomplete_beta_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_tail(double t, double df) {
  const double t2 = t * t;
  return regularized_incomplete_beta(df / (df + t2), 0.5 * df, 0.5);
}

double student_t_pdf(double t, double df) {
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

double t_critical(double confidence, int df) {
  if (df < 1) throw InvalidInput("degrees of freedom must be >= 1, got " + std::to_string(df));
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidInput("confidence must lie in (0, 1)");
  }
  const double nu = df;
  // g(t) is increasing on [0, inf). Small confidences are matched on the
  // central mass, whose incomplete-beta argument t^2 / (nu + t^2) keeps full
  // relative precision as t -> 0; large ones on the tail mass.
  const bool central = confidence < 0.5;
  auto g = [&](double t) {
    if (central) return regularized_incomplete_beta(t * t / (nu + t * t), 0.5, 0.5 * nu) - confidence;
    return (1.0 - confidence) - student_t_two_sided_tail(t, nu);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw InvalidInput("confidence too close to 1");
  }
  // Safeguarded Newton: fall back to bisection when the step leaves [lo, hi].
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 2000; ++iter) {
    const double f = g(t);
    if (f < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = 2.0 * student_t_pdf(t, nu);
    double next = slope != 0.0 ? t - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(t) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return next;
    }
    t = next;
  }
  return t;
}

}  // namespace decenergy
