#pragma once

// Maximum-likelihood fitting of MGSN_d(p, mu, Sigma): EM for a fixed p
// (free, mu = 0, or diagonal Sigma) and profile likelihood over p.

#include <optional>
#include <string>
#include <vector>

#include "mgsn/data.hpp"
#include "mgsn/distribution.hpp"
#include "mgsn/series.hpp"

namespace mgsn {

enum class Constraint { None, MuZero, DiagSigma, NormalP1 };

std::string to_string(Constraint c);
/// Accepts none|mu0|diag|normal. Throws InvalidParameter otherwise.
Constraint parse_constraint(const std::string& s);

struct EmControl {
  static constexpr int kPaperIterations = 20;

  int max_iter = 500;
  double rel_tol = 1e-8;
  // Starting diagonal jitter relative to trace(Sigma)/d when an update is
  // not positive definite; escalated x10 up to 1e-4.
  double jitter = 1e-10;
  // Exactly kPaperIterations iterations with no convergence test.
  bool paper_mode = false;

  static EmControl paper() {
    EmControl c;
    c.paper_mode = true;
    return c;
  }
  void validate() const;
};

enum class InitMethod {
  SampleMoments,    // sample mean and divisor-n covariance
  MethodOfMoments,  // mu = p xbar, Sigma = p S - p(1-p) xbar xbar^T, falls back if not PD
};

struct StartValue {
  Vector mu;
  SymMatrix sigma;
};

struct ProfilePoint {
  double p;
  double loglik;
  int n_iter;
};

struct ProfileFailure {
  double p;
  std::string message;
};

struct FitResult {
  MgsnParams params;
  double loglik;
  int n_iter;
  bool converged;
  Constraint constraint;
  // Observed log-likelihood at the start value and after every iteration.
  std::vector<double> loglik_trace;
  // Profile fits only: strictly increasing p.
  std::vector<ProfilePoint> profile_trace;
  std::vector<ProfileFailure> failures;
};

struct EStepResult {
  Vector a;  // E(N | x_i)
  Vector b;  // E(1/N | x_i)
  double loglik;
};

struct MStepResult {
  Vector mu;
  SymMatrix sigma;
  int jitter_steps = 0;
};

double observed_loglik(const DataMatrix& data, const MgsnParams& params,
                       const SeriesControl& sctl = {});

EStepResult em_e_step(const DataMatrix& data, const MgsnParams& params,
                      const SeriesControl& sctl = {});

/// Maximizer of the expected complete-data log-likelihood given weights.
/// Throws DegenerateUpdate if Sigma stays non-PD after the jitter schedule.
MStepResult em_m_step(const DataMatrix& data, const Vector& a, const Vector& b,
                      Constraint constraint = Constraint::None, double jitter = 1e-10);

/// Expected complete-data log-likelihood Q(theta | current) for weights
/// (a, b), up to an additive constant.
double expected_complete_loglik(const DataMatrix& data, const Vector& a, const Vector& b,
                                const Vector& mu, const SymMatrix& sigma);

/// Gaussian MLE (p = 1) in closed form.
FitResult fit_normal(const DataMatrix& data);

FitResult em_fit(const DataMatrix& data, double p, Constraint constraint,
                 const std::optional<StartValue>& start, const EmControl& ctl = {},
                 const SeriesControl& sctl = {});

FitResult em_fit_fixed_p(const DataMatrix& data, double p,
                         const std::optional<StartValue>& start = std::nullopt,
                         const EmControl& ctl = {}, const SeriesControl& sctl = {});
FitResult em_fit_mu_zero(const DataMatrix& data, double p, const EmControl& ctl = {},
                         const SeriesControl& sctl = {});
FitResult em_fit_diag(const DataMatrix& data, double p, const EmControl& ctl = {},
                      const SeriesControl& sctl = {});

/// Start value for the given constraint (sample moments unless `method`
/// asks for the moment-inversion start).
StartValue default_start(const DataMatrix& data, double p, Constraint constraint,
                         InitMethod method = InitMethod::SampleMoments);

/// 0.02, 0.04, ..., 1.00.
std::vector<double> default_p_grid();
/// Parses "lo:step:hi" or a comma-separated list. Throws InvalidParameter.
std::vector<double> parse_p_grid(const std::string& spec);

struct ProfileOptions {
  Constraint constraint = Constraint::None;
  // Golden-section search inside the best grid cell; ignored in paper mode.
  bool refine = true;
  double refine_tol = 1e-4;
  bool warm_start = true;
  InitMethod init = InitMethod::SampleMoments;
};

/// Runs the constrained EM at every grid value (ascending, warm-started),
/// then refines around the best point. Failing grid points are recorded
/// and skipped; throws FitFailure only when all of them fail.
FitResult profile_fit(const DataMatrix& data, const std::vector<double>& grid,
                      const EmControl& ctl = {}, const SeriesControl& sctl = {},
                      const ProfileOptions& options = {});

}  // namespace mgsn
