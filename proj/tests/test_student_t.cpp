#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "decenergy/errors.hpp"
#include "decenergy/student_t.hpp"
#include "doctest.h"

using namespace decenergy;

// Two-sided critical values frozen from a 40-digit root of the incomplete beta tail.
TEST_CASE("frozen quantiles") {
  struct Case {
    double confidence;
    int df;
    double expected;
  };
  const Case cases[] = {
      {0.99, 1, 63.656741162871524},   {0.99, 2, 9.9248432009182886},
      {0.99, 4, 4.604094871349992},   {0.99, 5, 4.0321429835552272},
      {0.99, 7, 3.4994832973504933},  {0.99, 9, 3.2498355415921257},
      {0.99, 99, 2.6264054572808272}, {0.99, 10000, 2.5763210466685286},
      {0.90, 4, 2.1318467863266505},   {0.50, 10, 0.69981206131243163},
  };
  for (const Case& c : cases) {
    CAPTURE(c.confidence);
    CAPTURE(c.df);
    CHECK(t_critical(c.confidence, c.df) == doctest::Approx(c.expected).epsilon(1e-12));
  }
}

TEST_CASE("table values to four significant digits") {
  CHECK(std::round(t_critical(0.99, 4) * 1000) / 1000 == 4.604);
  CHECK(std::round(t_critical(0.99, 99) * 1000) / 1000 == 2.626);
  CHECK(std::round(t_critical(0.99, 9) * 1000) / 1000 == 3.250);
}

TEST_CASE("agrees with an independent quantile implementation") {
  for (const double c : {0.01, 0.2, 0.5, 0.8, 0.9, 0.95, 0.99, 0.999, 0.9999}) {
    for (const int df : {1, 2, 3, 5, 8, 13, 30, 49, 120, 1000, 100000}) {
      const boost::math::students_t dist(df);
      const double expected = boost::math::quantile(dist, 0.5 + c / 2);
      CAPTURE(c);
      CAPTURE(df);
      CHECK(t_critical(c, df) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("incomplete beta matches the reference") {
  for (const double x : {0.0, 1e-6, 0.1, 0.37, 0.5, 0.9, 0.999, 1.0}) {
    for (const auto& [a, b] : {std::pair{0.5, 0.5}, {2.0, 3.0}, {50.0, 0.5}, {0.5, 200.0}, {7.5, 7.5}}) {
      CAPTURE(x);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(regularized_incomplete_beta(x, a, b) ==
            doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-11));
    }
  }
}

TEST_CASE("tail and density against the reference") {
  for (const double df : {1.0, 4.0, 30.0}) {
    const boost::math::students_t dist(df);
    for (const double t : {0.0, 0.3, 1.0, 2.5, 8.0}) {
      CHECK(student_t_two_sided_tail(t, df) ==
            doctest::Approx(2 * boost::math::cdf(boost::math::complement(dist, t))).epsilon(1e-11));
      CHECK(student_t_pdf(t, df) == doctest::Approx(boost::math::pdf(dist, t)).epsilon(1e-11));
    }
  }
}

TEST_CASE("monotone in confidence and degrees of freedom") {
  for (int df = 1; df < 200; df += 7) {
    double previous = 0.0;
    for (double c = 0.05; c < 0.999; c += 0.05) {
      const double t = t_critical(c, df);
      CHECK(t > previous);
      previous = t;
    }
  }
  for (const double c : {0.5, 0.9, 0.99}) {
    double previous = INFINITY;
    for (int df = 1; df <= 2000; df = df < 20 ? df + 1 : df * 2) {
      const double t = t_critical(c, df);
      CHECK(t < previous);
      previous = t;
    }
  }
}

TEST_CASE("limits") {
  const double z = boost::math::quantile(boost::math::normal(), 0.995);
  CHECK(z == doctest::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(std::fabs(t_critical(0.99, 10000) - z) / z < 0.005);
  CHECK(t_critical(1e-9, 3) > 0.0);
  CHECK(t_critical(1e-9, 3) < 1e-8);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(t_critical(0.99, 0), InvalidInput);
  CHECK_THROWS_AS(t_critical(0.0, 5), InvalidInput);
  CHECK_THROWS_AS(t_critical(1.0, 5), InvalidInput);
}
