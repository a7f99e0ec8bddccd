#include "mgsn/gsn.hpp"

#include <cmath>
#include <string>

#include "mgsn/errors.hpp"

namespace mgsn {

void GsnParams::validate() const {
  if (!std::isfinite(mu)) throw InvalidParameter("mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidParameter("sigma must be > 0");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in (0, 1]");
}

double gsn_logpdf(double x, const GsnParams& params, const SeriesControl& ctl) {
  params.validate();
  ctl.validate();
  const double s2 = params.sigma * params.sigma;
  const SeriesShape shape{params.p, 1, std::log(s2)};
  const SeriesPoint pt{x * x / s2, x * params.mu / s2, params.mu * params.mu / s2};
  return evaluate_series(shape, pt, ctl, false).log_density;
}

double gsn_pdf(double x, const GsnParams& params, const SeriesControl& ctl) {
  return std::exp(gsn_logpdf(x, params, ctl));
}

double gsn_mgf(double t, const GsnParams& params) {
  params.validate();
  const double a = params.mu * t + 0.5 * params.sigma * params.sigma * t * t;
  if (params.p == 1.0) return std::exp(a);
  if (!(a + std::log1p(-params.p) < 0.0)) {
    throw OutsideDomain("t = " + std::to_string(t) + " outside the MGF domain");
  }
  const double e = std::exp(a);
  return params.p * e / (1.0 - (1.0 - params.p) * e);
}

GsnMoments gsn_moments(const GsnParams& params) {
  params.validate();
  const double p = params.p;
  const double q = 1.0 - p;
  const double m = params.mu;
  const double s2 = params.sigma * params.sigma;
  const double m2 = m * m;
  // p^2 Var(X)
  const double v = p * s2 + m2 * q;

  GsnMoments out{};
  out.mean = m / p;
  out.variance = v / (p * p);
  out.skewness = q * (m2 * m * (2.0 - p) + 3.0 * m * s2 * p) / std::pow(v, 1.5);
  // 3 + kappa_4 / kappa_2^2, both cumulants taken from the CGF.
  const double k4 = q * (m2 * m2 * (p * p - 6.0 * p + 6.0) + 6.0 * m2 * s2 * p * (2.0 - p) +
                         3.0 * s2 * s2 * p * p);
  out.kurtosis = 3.0 + k4 / (v * v);
  return out;
}

}  // namespace mgsn
