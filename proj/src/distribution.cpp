#include "mgsn/distribution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "mgsn/errors.hpp"

namespace mgsn {

namespace {

void check_dim(const Vector& x, const MgsnParams& params, const char* what) {
  if (x.size() != params.dim()) {
    throw DimensionMismatch(std::string(what) + " has size " + std::to_string(x.size()) +
                            ", distribution has dim " + std::to_string(params.dim()));
  }
}

}  // namespace

MgsnParams::MgsnParams(double p, Vector mu, SymMatrix sigma)
    : p_(p), mu_(std::move(mu)), sigma_(std::move(sigma)), chol_(cholesky(sigma_)) {
  if (!(p_ > 0.0 && p_ <= 1.0)) throw InvalidParameter("p must lie in (0, 1]");
  if (mu_.size() != sigma_.dim()) {
    throw DimensionMismatch("mu has size " + std::to_string(mu_.size()) + ", Sigma has dim " +
                            std::to_string(sigma_.dim()));
  }
  if (!mu_.allFinite()) throw InvalidParameter("mu has non-finite entries");
}

SeriesPoint series_point(const Vector& x, const MgsnParams& params) {
  check_dim(x, params, "x");
  const Vector wx = params.chol().solve_lower(x);
  const Vector wm = params.chol().solve_lower(params.mu());
  return {wx.squaredNorm(), wx.dot(wm), wm.squaredNorm()};
}

double mgsn_logpdf(const Vector& x, const MgsnParams& params, const SeriesControl& ctl) {
  ctl.validate();
  const SeriesShape shape{params.p(), params.dim(), params.chol().logdet()};
  return evaluate_series(shape, series_point(x, params), ctl, false).log_density;
}

LatentCountMoments latent_count_moments(const Vector& x, const MgsnParams& params,
                                        const SeriesControl& ctl) {
  ctl.validate();
  const SeriesShape shape{params.p(), params.dim(), params.chol().logdet()};
  const SeriesValue v = evaluate_series(shape, series_point(x, params), ctl, true);
  return {v.log_density, v.mean_n, v.mean_inv_n, v.terms};
}

double cond_n_mean(const Vector& x, const MgsnParams& params, const SeriesControl& ctl) {
  if (params.p() == 1.0) return 1.0;
  return latent_count_moments(x, params, ctl).mean_n;
}

double cond_n_inv_mean(const Vector& x, const MgsnParams& params, const SeriesControl& ctl) {
  if (params.p() == 1.0) return 1.0;
  return latent_count_moments(x, params, ctl).mean_inv_n;
}

double mgsn_mgf(const Vector& t, const MgsnParams& params) {
  check_dim(t, params, "t");
  const double a = params.mu().dot(t) + 0.5 * t.dot(params.sigma().matrix() * t);
  if (params.p() == 1.0) return std::exp(a);
  if (!(a + std::log1p(-params.p()) < 0.0)) throw OutsideDomain("t outside the MGF domain");
  const double e = std::exp(a);
  return params.p() * e / (1.0 - (1.0 - params.p()) * e);
}

MomentRelation moment_relation(const MgsnParams& params) {
  const double p = params.p();
  const Vector& mu = params.mu();
  Vector mean = mu / p;
  Matrix disp = (p * params.sigma().matrix() + (1.0 - p) * (mu * mu.transpose())) / (p * p);
  return {std::move(mean), SymMatrix::symmetrized(disp)};
}

MgsnParams params_from_moments(double p, const Vector& mean, const SymMatrix& dispersion) {
  Vector mu = p * mean;
  Matrix sigma = p * dispersion.matrix() - p * (1.0 - p) * (mean * mean.transpose());
  return MgsnParams(p, std::move(mu), SymMatrix::symmetrized(sigma));
}

double mardia_beta1(const MgsnParams& params) {
  const double p = params.p();
  const double q = 1.0 - p;
  const int d = params.dim();
  const MomentRelation rel = moment_relation(params);
  const CholFactor fx = cholesky(rel.dispersion);

  // Third central moments are kappa_lhm = c3 mu_l mu_h mu_m
  //   + c2 (mu_m s_hl + mu_l s_hm + mu_h s_lm).
  // Whitening every index by L_X^{-1} turns the double contraction with
  // Sigma_X^{-1} into a plain sum of squares.
  const double c3 = q * (2.0 - p) / (p * p * p);
  const double c2 = q / (p * p);
  const Vector m = fx.solve_lower(params.mu());
  Matrix g = fx.lower().triangularView<Eigen::Lower>().solve(params.sigma().matrix());
  g = fx.lower().triangularView<Eigen::Lower>().solve(g.transpose()).transpose();

  double beta = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        const double u = c3 * m(i) * m(j) * m(k) + c2 * (m(k) * g(i, j) + m(i) * g(j, k) + m(j) * g(i, k));
        beta += u * u;
      }
    }
  }
  return beta;
}

MomentSummary mgsn_moments(const MgsnParams& params) {
  const int d = params.dim();
  MomentRelation rel = moment_relation(params);
  const SymMatrix& cov = rel.dispersion;
  Matrix corr(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      corr(i, j) = i == j ? 1.0
                          : std::clamp(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j)), -1.0, 1.0);
    }
  }
  return {std::move(rel.mean), cov, SymMatrix::symmetrized(corr), mardia_beta1(params)};
}

MgsnParams marginal(const MgsnParams& params, std::span<const int> indices) {
  const int d = params.dim();
  if (indices.empty()) throw BadIndexSet("empty index set");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= d) {
      throw BadIndexSet("index " + std::to_string(indices[i]) + " outside [0, " +
                        std::to_string(d) + ")");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) throw BadIndexSet("indices not strictly increasing");
  }
  const int h = static_cast<int>(indices.size());
  Vector mu(h);
  Matrix sigma(h, h);
  for (int i = 0; i < h; ++i) {
    mu(i) = params.mu()(indices[i]);
    for (int j = 0; j < h; ++j) sigma(i, j) = params.sigma()(indices[i], indices[j]);
  }
  return MgsnParams(params.p(), std::move(mu), SymMatrix::symmetrized(sigma));
}

MgsnParams affine(const MgsnParams& params, const Matrix& d) {
  if (d.cols() != params.dim() || d.rows() < 1 || d.rows() > params.dim()) {
    throw DimensionMismatch("transform is " + std::to_string(d.rows()) + "x" +
                            std::to_string(d.cols()) + " for dim " + std::to_string(params.dim()));
  }
  if (Eigen::FullPivLU<Matrix>(d).rank() < d.rows()) {
    throw RankDeficient("transform of size " + std::to_string(d.rows()) + "x" +
                        std::to_string(d.cols()) + " lacks full row rank");
  }
  Vector mu = d * params.mu();
  SymMatrix sigma = SymMatrix::symmetrized(d * params.sigma().matrix() * d.transpose());
  try {
    return MgsnParams(params.p(), std::move(mu), std::move(sigma));
  } catch (const NotPositiveDefinite&) {
    throw RankDeficient("D Sigma D^T is not positive definite; D lacks full row rank");
  }
}

GsnParams project(const MgsnParams& params, const Vector& c) {
  const MgsnParams proj = affine(params, c.transpose());
  return {proj.mu()(0), std::sqrt(proj.sigma()(0, 0)), proj.p()};
}

double canonical_corr(const MgsnParams& params, int h) {
  return largest_canonical_correlation(params.sigma(), h);
}

bool mtp2_holds(const MgsnParams& params) {
  const Matrix inv = params.chol().inverse();
  const int d = params.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && inv(i, j) > 1e-12) return false;
    }
  }
  return true;
}

MgsnParams Fig1Preset::params() const {
  Vector mu(2);
  mu << mu1, mu2;
  Matrix s(2, 2);
  s << s11, s12, s12, s22;
  return MgsnParams(p, std::move(mu), SymMatrix(s));
}

std::span<const Fig1Preset> fig1_presets() {
  static constexpr std::array<Fig1Preset, 4> presets{{
      {'a', 0.75, 0.0, 0.0, 2.0, 2.0, 0.0},
      {'b', 0.50, 2.0, 2.0, 1.0, 1.0, -0.5},
      {'c', 0.15, 2.0, 1.0, 1.0, 1.0, -0.5},
      {'d', 0.15, 0.5, -2.5, 1.0, 1.0, 0.5},
  }};
  return presets;
}

MgsnParams study_params(double p) {
  Vector mu(4);
  mu << 0.0, 0.0, 1.0, 1.0;
  Matrix s(4, 4);
  s << 2, 2, 1, 0,
       2, 3, 2, 1,
       1, 2, 3, 2,
       0, 1, 2, 2;
  return MgsnParams(p, std::move(mu), SymMatrix(s));
}

}  // namespace mgsn
