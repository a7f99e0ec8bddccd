#pragma once

// Dense symmetric linear algebra and log-domain helpers shared by the
// distribution, sampling and estimation code.

#include <Eigen/Dense>

#include <limits>
#include <span>

namespace mgsn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kLn2Pi = 1.8378770664093454836;

/// A symmetric d x d matrix. Construction rejects inputs whose asymmetry
/// exceeds 1e-12 relative to the largest entry and stores (M + M^T) / 2.
class SymMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  /// Symmetrizes without the tolerance check. Used for iterates whose
  /// asymmetry is pure rounding from accumulation order.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const Vector& diag);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace(); }

 private:
  struct Unchecked {};
  SymMatrix(const Matrix& m, Unchecked);

  Matrix m_;
};

/// Lower Cholesky factor of a positive-definite matrix plus its log-determinant.
class CholFactor {
 public:
  CholFactor(Matrix lower, double logdet) : lower_(std::move(lower)), logdet_(logdet) {}

  int dim() const { return static_cast<int>(lower_.rows()); }
  const Matrix& lower() const { return lower_; }
  double logdet() const { return logdet_; }

  /// L^{-1} v by forward substitution.
  Vector solve_lower(const Vector& v) const;
  /// M^{-1} v via two triangular solves.
  Vector solve(const Vector& v) const;
  /// Explicit inverse; only for small outputs such as Mardia contractions
  /// and the MTP2 check.
  Matrix inverse() const;
  /// L L^T.
  Matrix reconstruct() const { return lower_ * lower_.transpose(); }

 private:
  Matrix lower_;
  double logdet_;
};

/// Throws NotPositiveDefinite when a pivot is <= 0 or not finite.
CholFactor cholesky(const SymMatrix& m);

/// v^T M^{-1} v for the factored M. Throws DimensionMismatch.
double quad_form(const CholFactor& f, const Vector& v);

double mvn_logpdf(const Vector& x, const Vector& mean, const CholFactor& cov);
double mvn_logpdf(const Vector& x, const Vector& mean, const SymMatrix& cov);

/// ln sum exp(t_i). Throws EmptyInput on an empty sequence.
double logsumexp(std::span<const double> terms);

// Streaming log-sum-exp: terms are added one at a time and the running
// total is rescaled whenever a new maximum arrives.
class LogSumExp {
 public:
  void add(double t);
  double value() const;
  bool empty() const { return count_ == 0; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double scaled_sum_ = 0.0;
  long count_ = 0;
};

/// Largest canonical correlation between the leading `h` coordinates and
/// the remaining ones of a covariance matrix.
double largest_canonical_correlation(const SymMatrix& sigma, int h);

}  // namespace mgsn
