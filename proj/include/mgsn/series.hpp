#pragma once

// Truncation policy and evaluator for the geometric-mixture series
//   f(x) = sum_k p (1-p)^{k-1} phi_d(x; k mu, k Sigma)
// shared by the univariate and multivariate densities and by the
// conditional moments of the latent count N.

namespace mgsn {

struct SeriesControl {
  static constexpr int kPaperTerms = 50;

  int k_max = 200;
  double rel_tol = 1e-12;
  // Exactly kPaperTerms terms, no early stop.
  bool paper_mode = false;

  static SeriesControl paper() {
    SeriesControl c;
    c.paper_mode = true;
    return c;
  }

  int term_cap() const { return paper_mode ? kPaperTerms : k_max; }
  void validate() const;
};

// Sufficient statistics of one observation for the whole series. With
// whitened quantities xx = x'S^{-1}x, xm = x'S^{-1}mu, mm = mu'S^{-1}mu the
// k-th quadratic form is (x - k mu)' (k S)^{-1} (x - k mu) = xx/k - 2 xm + k mm.
struct SeriesPoint {
  double xx = 0.0;
  double xm = 0.0;
  double mm = 0.0;
};

struct SeriesShape {
  double p = 1.0;
  int dim = 1;
  double logdet = 0.0;  // ln |Sigma|
};

struct SeriesValue {
  double log_density = 0.0;
  double mean_n = 1.0;      // E(N | X = x)
  double mean_inv_n = 1.0;  // E(1/N | X = x)
  int terms = 1;
};

/// Evaluates the density series at one point. With `with_moments` the
/// posterior moments of N are accumulated from the same weights and the
/// truncation also bounds the tail of E(N; N > K). Throws SeriesUnderflow
/// when every term is -inf in log space.
SeriesValue evaluate_series(const SeriesShape& shape, const SeriesPoint& pt,
                            const SeriesControl& ctl, bool with_moments);

}  // namespace mgsn
