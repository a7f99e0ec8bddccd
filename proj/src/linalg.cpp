#include "mgsn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgsn/errors.hpp"

namespace mgsn {

namespace {

void require_square(const Matrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw DimensionMismatch("symmetric matrix must be square with dim >= 1, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw InvalidParameter("matrix has non-finite entries");
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  require_square(m);
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw InvalidParameter("matrix is not symmetric (max |m_ij - m_ji| = " +
                           std::to_string(asym) + ")");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix::SymMatrix(const Matrix& m, Unchecked) : m_(0.5 * (m + m.transpose())) {}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  require_square(m);
  return SymMatrix(m, Unchecked{});
}

SymMatrix SymMatrix::identity(int dim) {
  return SymMatrix(Matrix::Identity(dim, dim), Unchecked{});
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()), Unchecked{});
}

Vector CholFactor::solve_lower(const Vector& v) const {
  if (v.size() != lower_.rows()) {
    throw DimensionMismatch("vector of size " + std::to_string(v.size()) +
                            " against factor of dim " + std::to_string(dim()));
  }
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

Vector CholFactor::solve(const Vector& v) const {
  Vector y = solve_lower(v);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix CholFactor::inverse() const {
  Matrix inv = lower_.triangularView<Eigen::Lower>().solve(Matrix::Identity(dim(), dim()));
  return inv.transpose() * inv;
}

CholFactor cholesky(const SymMatrix& m) {
  const int d = m.dim();
  Eigen::LLT<Matrix> llt(m.matrix());
  Matrix lower = llt.matrixL();
  bool ok = llt.info() == Eigen::Success;
  for (int i = 0; ok && i < d; ++i) {
    ok = std::isfinite(lower(i, i)) && lower(i, i) > 0.0;
  }
  if (!ok) throw NotPositiveDefinite("Cholesky pivot <= 0 in matrix of dim " + std::to_string(d));
  const double logdet = 2.0 * lower.diagonal().array().log().sum();
  return CholFactor(std::move(lower), logdet);
}

double quad_form(const CholFactor& f, const Vector& v) {
  return f.solve_lower(v).squaredNorm();
}

double mvn_logpdf(const Vector& x, const Vector& mean, const CholFactor& cov) {
  if (x.size() != mean.size()) {
    throw DimensionMismatch("x has size " + std::to_string(x.size()) + ", mean has size " +
                            std::to_string(mean.size()));
  }
  const double d = static_cast<double>(cov.dim());
  return -0.5 * d * kLn2Pi - 0.5 * cov.logdet() - 0.5 * quad_form(cov, x - mean);
}

double mvn_logpdf(const Vector& x, const Vector& mean, const SymMatrix& cov) {
  return mvn_logpdf(x, mean, cholesky(cov));
}

double logsumexp(std::span<const double> terms) {
  if (terms.empty()) throw EmptyInput("logsumexp of an empty sequence");
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

void LogSumExp::add(double t) {
  ++count_;
  if (t <= max_) {
    scaled_sum_ += std::exp(t - max_);
    return;
  }
  if (std::isfinite(max_)) scaled_sum_ *= std::exp(max_ - t);
  scaled_sum_ += 1.0;
  max_ = t;
}

double LogSumExp::value() const {
  if (count_ == 0) throw EmptyInput("logsumexp of an empty sequence");
  if (!std::isfinite(max_)) return max_;
  return max_ + std::log(scaled_sum_);
}

double largest_canonical_correlation(const SymMatrix& sigma, int h) {
  const int d = sigma.dim();
  if (h < 1 || h >= d) {
    throw BadIndexSet("split index " + std::to_string(h) + " outside [1, " +
                      std::to_string(d - 1) + "]");
  }
  const Matrix& s = sigma.matrix();
  const CholFactor f11 = cholesky(SymMatrix::symmetrized(s.topLeftCorner(h, h)));
  const CholFactor f22 = cholesky(SymMatrix::symmetrized(s.bottomRightCorner(d - h, d - h)));
  // L11^{-1} S12 L22^{-T}: its singular values are the canonical correlations.
  Matrix m = f11.lower().triangularView<Eigen::Lower>().solve(s.topRightCorner(h, d - h));
  m = f22.lower().triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose(), Eigen::EigenvaluesOnly);
  const double top = std::max(0.0, eig.eigenvalues().maxCoeff());
  return std::min(1.0, std::sqrt(top));
}

}  // namespace mgsn
