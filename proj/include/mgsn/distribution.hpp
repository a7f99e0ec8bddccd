#pragma once

// The d-variate geometric skew-normal law MGSN_d(p, mu, Sigma): the sum of
// N ~ GE(p) i.i.d. N_d(mu, Sigma) vectors.

#include <span>
#include <vector>

#include "mgsn/gsn.hpp"
#include "mgsn/linalg.hpp"
#include "mgsn/series.hpp"

namespace mgsn {

class MgsnParams {
 public:
  /// Throws InvalidParameter / DimensionMismatch / NotPositiveDefinite.
  MgsnParams(double p, Vector mu, SymMatrix sigma);

  double p() const { return p_; }
  const Vector& mu() const { return mu_; }
  const SymMatrix& sigma() const { return sigma_; }
  const CholFactor& chol() const { return chol_; }
  int dim() const { return static_cast<int>(mu_.size()); }

 private:
  double p_;
  Vector mu_;
  SymMatrix sigma_;
  CholFactor chol_;
};

struct MomentSummary {
  Vector mean;
  SymMatrix covariance;
  SymMatrix correlation;
  double mardia_beta1;
};

/// (mean, dispersion) of X: p mean = mu, p^2 dispersion = p Sigma + (1-p) mu mu^T.
struct MomentRelation {
  Vector mean;
  SymMatrix dispersion;
};

struct LatentCountMoments {
  double log_density;
  double mean_n;      // E(N | X = x) >= 1
  double mean_inv_n;  // E(1/N | X = x) in (0, 1]
  int terms;
};

double mgsn_logpdf(const Vector& x, const MgsnParams& params, const SeriesControl& ctl = {});

/// Whitened sufficient statistics of x for the density series.
SeriesPoint series_point(const Vector& x, const MgsnParams& params);

/// E(N | x) and E(1/N | x) from one shared set of series weights.
LatentCountMoments latent_count_moments(const Vector& x, const MgsnParams& params,
                                        const SeriesControl& ctl = {});
double cond_n_mean(const Vector& x, const MgsnParams& params, const SeriesControl& ctl = {});
double cond_n_inv_mean(const Vector& x, const MgsnParams& params, const SeriesControl& ctl = {});

/// Throws OutsideDomain unless mu't + t'Sigma t / 2 + ln(1-p) < 0.
double mgsn_mgf(const Vector& t, const MgsnParams& params);

MomentSummary mgsn_moments(const MgsnParams& params);
MomentRelation moment_relation(const MgsnParams& params);
/// Inverse of moment_relation: mu = p mean, Sigma = p D - p(1-p) mean mean^T.
MgsnParams params_from_moments(double p, const Vector& mean, const SymMatrix& dispersion);

/// Mardia's beta_1 from the third central moments and the inverse dispersion.
double mardia_beta1(const MgsnParams& params);

/// Marginal law of the coordinates in `indices` (0-based, strictly increasing).
MgsnParams marginal(const MgsnParams& params, std::span<const int> indices);

/// Law of D X for an s x d matrix D of full row rank.
MgsnParams affine(const MgsnParams& params, const Matrix& d);

/// GSN law of c^T X.
GsnParams project(const MgsnParams& params, const Vector& c);

/// Largest canonical correlation between X[0, h) and X[h, d). Uses Sigma only;
/// the underlying result is stated for mu = 0.
double canonical_corr(const MgsnParams& params, int h);

/// Sufficient condition for MTP2: every off-diagonal entry of Sigma^{-1} <= 1e-12.
bool mtp2_holds(const MgsnParams& params);

struct Fig1Preset {
  char name;
  double p;
  double mu1, mu2;
  double s11, s22, s12;
  MgsnParams params() const;
};

/// The four bivariate parameter sets used for the joint-density contour figure.
std::span<const Fig1Preset> fig1_presets();

/// The simulation-study configuration: d = 4, mu = (0,0,1,1) and the
/// 4x4 dispersion below, with the caller's p.
MgsnParams study_params(double p);

}  // namespace mgsn
