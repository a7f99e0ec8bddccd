#pragma once

// Likelihood-ratio tests for normality (p = 1), symmetry (mu = 0) and
// uncorrelated components (diagonal Sigma), each against the free profile fit.

#include <string>
#include <vector>

#include "mgsn/estimation.hpp"

namespace mgsn {

/// P(chi2_df > x). x >= 0, df >= 1.
double chi2_sf(double x, int df);

struct TailFunction {
  enum class Family { ChiSquare, HalfChiSquareMix };

  Family family;
  int df;

  /// Survival function; the half mixture puts mass 1/2 at zero.
  double sf(double x) const;
  std::string describe() const;
};

struct LrtResult {
  double statistic;
  FitResult null_fit;
  FitResult alt_fit;
  TailFunction reference;
  double p_value;
  // Set when a slightly negative statistic was clamped to zero.
  bool clamped = false;
};

struct LrtOptions {
  std::vector<double> grid = default_p_grid();
  EmControl em;
  SeriesControl series;
  bool refine = true;
};

LrtResult lrt_normality(const DataMatrix& data, const LrtOptions& options = {});
LrtResult lrt_symmetry(const DataMatrix& data, const LrtOptions& options = {});
LrtResult lrt_diagonal(const DataMatrix& data, const LrtOptions& options = {});

/// 2 (alt - null), clamped to 0 when in [-1e-6, 0); throws FitFailure below.
double lrt_statistic(double null_loglik, double alt_loglik, bool* clamped = nullptr);

}  // namespace mgsn
