#include "mgsn/inference.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "mgsn/errors.hpp"

namespace mgsn {

namespace {

constexpr double kClampTolerance = 1e-6;

FitResult profile(const DataMatrix& data, const LrtOptions& options, Constraint constraint) {
  ProfileOptions po;
  po.constraint = constraint;
  po.refine = options.refine;
  return profile_fit(data, options.grid, options.em, options.series, po);
}

LrtResult finish(FitResult null_fit, FitResult alt_fit, TailFunction reference) {
  bool clamped = false;
  const double t = lrt_statistic(null_fit.loglik, alt_fit.loglik, &clamped);
  const double pv = reference.sf(t);
  return {t, std::move(null_fit), std::move(alt_fit), reference, pv, clamped};
}

}  // namespace

double chi2_sf(double x, int df) {
  if (df < 1) throw InvalidParameter("chi-square df must be >= 1");
  if (!(x >= 0.0)) throw InvalidParameter("chi-square argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double TailFunction::sf(double x) const {
  if (family == Family::ChiSquare) return chi2_sf(x, df);
  return x > 0.0 ? 0.5 * chi2_sf(x, df) : 1.0;
}

std::string TailFunction::describe() const {
  if (family == Family::ChiSquare) return "chi2(df=" + std::to_string(df) + ")";
  return "0.5*delta0 + 0.5*chi2(df=" + std::to_string(df) + ")";
}

double lrt_statistic(double null_loglik, double alt_loglik, bool* clamped) {
  double t = 2.0 * (alt_loglik - null_loglik);
  if (clamped) *clamped = false;
  if (t < 0.0) {
    if (t < -kClampTolerance) {
      throw FitFailure("alternative log-likelihood is below the nested null by " +
                       std::to_string(-0.5 * t));
    }
    t = 0.0;
    if (clamped) *clamped = true;
  }
  return t;
}

LrtResult lrt_normality(const DataMatrix& data, const LrtOptions& options) {
  FitResult alt = profile(data, options, Constraint::None);
  FitResult null = fit_normal(data);
  return finish(std::move(null), std::move(alt), {TailFunction::Family::HalfChiSquareMix, 1});
}

LrtResult lrt_symmetry(const DataMatrix& data, const LrtOptions& options) {
  FitResult alt = profile(data, options, Constraint::None);
  FitResult null = profile(data, options, Constraint::MuZero);
  return finish(std::move(null), std::move(alt), {TailFunction::Family::ChiSquare, data.cols()});
}

LrtResult lrt_diagonal(const DataMatrix& data, const LrtOptions& options) {
  const int d = data.cols();
  FitResult alt = profile(data, options, Constraint::None);
  FitResult null = profile(data, options, Constraint::DiagSigma);
  return finish(std::move(null), std::move(alt),
                {TailFunction::Family::ChiSquare, d * (d + 1) / 2});
}

}  // namespace mgsn
