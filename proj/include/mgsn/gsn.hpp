#pragma once

#include "mgsn/series.hpp"

namespace mgsn {

/// Univariate GSN(mu, sigma, p): the sum of N ~ GE(p) i.i.d. N(mu, sigma^2).
struct GsnParams {
  double mu = 0.0;
  double sigma = 1.0;
  double p = 1.0;

  void validate() const;
};

struct GsnMoments {
  double mean;
  double variance;
  double skewness;
  double kurtosis;  // non-excess: 3 for the normal case
};

double gsn_pdf(double x, const GsnParams& params, const SeriesControl& ctl = {});
double gsn_logpdf(double x, const GsnParams& params, const SeriesControl& ctl = {});

/// MGF; throws OutsideDomain unless 2 mu t + sigma^2 t^2 + 2 ln(1-p) < 0.
double gsn_mgf(double t, const GsnParams& params);

GsnMoments gsn_moments(const GsnParams& params);

}  // namespace mgsn
