#include <doctest.h>

#include <cmath>
#include <random>

#include "mgsn/errors.hpp"
#include "mgsn/gsn.hpp"
#include "oracles.hpp"

using namespace mgsn;

namespace {

double trapezoid_pdf(const GsnParams& g, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.5 * (gsn_pdf(lo, g) + gsn_pdf(hi, g));
  for (int i = 1; i < n; ++i) s += gsn_pdf(lo + i * h, g);
  return s * h;
}

double direct_pdf(double x, const GsnParams& g, int terms = 10000) {
  Vector xv(1), mu(1);
  xv << x;
  mu << g.mu;
  Matrix s(1, 1);
  s << g.sigma * g.sigma;
  return static_cast<double>(std::exp(oracle::direct_series(xv, g.p, mu, s, terms).log_density));
}

}  // namespace

TEST_SUITE("gsn-univariate") {

TEST_CASE("p = 1 is the normal law") {
  CHECK(gsn_pdf(0.0, {0.0, 1.0, 1.0}) == doctest::Approx(1.0 / std::sqrt(2 * M_PI)));
  CHECK(gsn_pdf(1.3, {0.2, 2.0, 1.0}) ==
        doctest::Approx(std::exp(-0.5 * std::pow((1.3 - 0.2) / 2.0, 2)) / (2.0 * std::sqrt(2 * M_PI))));
}

TEST_CASE("standard GSN is symmetric") {
  const GsnParams g{0.0, 1.0, 0.5};
  for (double x : {0.5, 1.0, 2.0}) CHECK(gsn_pdf(x, g) == doctest::Approx(gsn_pdf(-x, g)).epsilon(1e-14));
}

TEST_CASE("pdf matches direct extended-precision summation") {
  const GsnParams g{1.0, 1.0, 0.5};
  CHECK(std::fabs(gsn_pdf(1.0, g) - direct_pdf(1.0, g)) < 1e-12);
  for (const GsnParams& h : {GsnParams{-0.7, 0.4, 0.2}, GsnParams{2.0, 3.0, 0.9}, GsnParams{0.1, 0.05, 0.3}}) {
    for (double x : {-3.0, -0.2, 0.0, 0.7, 4.0, 12.0}) {
      CHECK(std::fabs(gsn_logpdf(x, h) - std::log(direct_pdf(x, h))) < 1e-9);
    }
  }
}

TEST_CASE("pdf integrates to one") {
  for (double p : {0.25, 0.5, 0.9, 1.0}) {
    const GsnParams g{0.6, 1.2, p};
    const GsnMoments m = gsn_moments(g);
    const double sd = std::sqrt(m.variance);
    CHECK(std::fabs(trapezoid_pdf(g, m.mean - 12 * sd, m.mean + 12 * sd, 20000) - 1.0) < 1e-5);
  }
}

TEST_CASE("mgf values and domain") {
  CHECK(gsn_mgf(0.0, {0.3, 1.5, 0.4}) == doctest::Approx(1.0));
  CHECK(gsn_mgf(1.0, {0.0, 1.0, 1.0}) == doctest::Approx(std::exp(0.5)));
  CHECK_THROWS_AS(gsn_mgf(2.0, {0.0, 1.0, 0.5}), OutsideDomain);
  CHECK_NOTHROW(gsn_mgf(50.0, {0.0, 1.0, 1.0}));
}

TEST_CASE("mgf against a Monte Carlo mean of exp(tX)") {
  std::mt19937_64 gen(2024);
  std::geometric_distribution<int> geo(0.5);
  std::normal_distribution<double> z;
  const double t = 0.5;
  const int n = 1000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const int k = geo(gen) + 1;
    const double v = std::exp(t * std::sqrt(static_cast<double>(k)) * z(gen));
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::fabs(gsn_mgf(t, {0.0, 1.0, 0.5}) - mean) < 3 * se);
}

TEST_CASE("closed-form moments") {
  const GsnMoments a = gsn_moments({1.0, 1.0, 0.5});
  CHECK(a.mean == doctest::Approx(2.0));
  CHECK(a.variance == doctest::Approx(4.0));
  CHECK(gsn_moments({0.0, 2.5, 0.3}).skewness == 0.0);
  const GsnMoments n = gsn_moments({0.0, 1.0, 1.0});
  CHECK(n.variance == doctest::Approx(1.0));
  CHECK(n.kurtosis == doctest::Approx(3.0));
}

TEST_CASE("moments agree with finite differences of the log mgf") {
  for (const GsnParams& g : {GsnParams{0.8, 1.3, 0.4}, GsnParams{-0.5, 0.7, 0.75}, GsnParams{0.0, 1.0, 0.5}}) {
    const GsnMoments m = gsn_moments(g);
    const double h = 1e-5;
    const double d1 = (gsn_mgf(h, g) - gsn_mgf(-h, g)) / (2 * h);
    CHECK(d1 == doctest::Approx(m.mean).epsilon(1e-6).scale(1.0));
    const double k = 1e-3;
    auto cgf = [&](double t) { return std::log(gsn_mgf(t, g)); };
    const double c2 = (cgf(k) - 2 * cgf(0) + cgf(-k)) / (k * k);
    CHECK(c2 == doctest::Approx(m.variance).epsilon(1e-4));
    // Third and fourth cumulants from five-point stencils.
    const double e = 2e-2;
    const double c3 = (cgf(2 * e) - 2 * cgf(e) + 2 * cgf(-e) - cgf(-2 * e)) / (2 * e * e * e);
    const double c4 = (cgf(2 * e) - 4 * cgf(e) + 6 * cgf(0) - 4 * cgf(-e) + cgf(-2 * e)) / std::pow(e, 4);
    CHECK(c3 / std::pow(m.variance, 1.5) == doctest::Approx(m.skewness).epsilon(1e-2).scale(1.0));
    CHECK(3.0 + c4 / (m.variance * m.variance) == doctest::Approx(m.kurtosis).epsilon(1e-2));
  }
}

TEST_CASE("mean and variance grow as p decreases") {
  double prev_mean = 0, prev_var = 0;
  for (double p : {0.9, 0.7, 0.5, 0.3, 0.1, 0.05}) {
    const GsnMoments m = gsn_moments({0.5, 1.0, p});
    CHECK(std::fabs(m.mean) > prev_mean);
    CHECK(m.variance > prev_var);
    prev_mean = std::fabs(m.mean);
    prev_var = m.variance;
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(gsn_pdf(0.0, {0.0, -1.0, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(gsn_pdf(0.0, {0.0, 1.0, 0.0}), InvalidParameter);
  CHECK_THROWS_AS(gsn_moments({0.0, 1.0, 1.5}), InvalidParameter);
}

}
