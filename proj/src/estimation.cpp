#include "mgsn/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mgsn/errors.hpp"

namespace mgsn {

namespace {

constexpr double kMaxJitter = 1e-4;

void require_fit_dims(const DataMatrix& data, const MgsnParams& params) {
  if (data.cols() != params.dim()) {
    throw DimensionMismatch("data has " + std::to_string(data.cols()) +
                            " columns, parameters have dim " + std::to_string(params.dim()));
  }
}

void require_enough_rows(const DataMatrix& data) {
  if (data.rows() <= data.cols()) {
    throw DegenerateUpdate("n = " + std::to_string(data.rows()) +
                           " observations cannot give a positive-definite covariance in dim " +
                           std::to_string(data.cols()));
  }
}

void require_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in (0, 1], got " + std::to_string(p));
}

// Adds escalating multiples of trace/d to the diagonal until the Cholesky
// factorization succeeds.
SymMatrix make_positive_definite(Matrix m, double jitter, int* steps) {
  const int d = static_cast<int>(m.rows());
  SymMatrix sym = SymMatrix::symmetrized(m);
  try {
    cholesky(sym);
    return sym;
  } catch (const NotPositiveDefinite&) {
  }
  const double scale = m.trace() / d;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DegenerateUpdate("covariance update has non-positive trace");
  }
  int n_steps = 0;
  for (double j = std::max(jitter, 1e-16); j <= kMaxJitter * (1.0 + 1e-9); j *= 10.0) {
    ++n_steps;
    SymMatrix trial = SymMatrix::symmetrized(m + Matrix::Identity(d, d) * (j * scale));
    try {
      cholesky(trial);
      if (steps) *steps = n_steps;
      return trial;
    } catch (const NotPositiveDefinite&) {
    }
  }
  throw DegenerateUpdate("covariance update is not positive definite after diagonal jitter up to " +
                         std::to_string(kMaxJitter) + " * trace/d");
}

// sum_i b_i x_i x_i^T - (s_x mu^T + mu s_x^T) + (sum_i a_i) mu mu^T
Matrix scatter_bracket(const DataMatrix& data, const Vector& a, const Vector& b, const Vector& mu) {
  const Matrix& x = data.values();
  const Vector sx = x.colwise().sum().transpose();
  Matrix bracket = x.transpose() * b.asDiagonal() * x;
  bracket -= sx * mu.transpose() + mu * sx.transpose();
  bracket += a.sum() * (mu * mu.transpose());
  return bracket;
}

struct SeriesPass {
  Vector a;
  Vector b;
  double loglik;
};

SeriesPass run_series(const DataMatrix& data, const MgsnParams& params, const SeriesControl& sctl,
                      bool with_moments) {
  require_fit_dims(data, params);
  sctl.validate();
  const int n = data.rows();
  const Matrix w =
      params.chol().lower().triangularView<Eigen::Lower>().solve(data.values().transpose());
  const Vector wm = params.chol().solve_lower(params.mu());
  const double mm = wm.squaredNorm();
  const SeriesShape shape{params.p(), params.dim(), params.chol().logdet()};

  SeriesPass out{Vector::Ones(n), Vector::Ones(n), 0.0};
  for (int i = 0; i < n; ++i) {
    const SeriesPoint pt{w.col(i).squaredNorm(), w.col(i).dot(wm), mm};
    SeriesValue v;
    try {
      v = evaluate_series(shape, pt, sctl, with_moments);
    } catch (const SeriesUnderflow& e) {
      throw SeriesUnderflow("row " + std::to_string(i + 1) + ": " + e.what());
    }
    out.loglik += v.log_density;
    out.a(i) = v.mean_n;
    out.b(i) = v.mean_inv_n;
  }
  return out;
}

MgsnParams build_params(double p, const Vector& mu, const SymMatrix& sigma) {
  try {
    return MgsnParams(p, mu, sigma);
  } catch (const NotPositiveDefinite& e) {
    throw DegenerateUpdate(e.what());
  }
}

}  // namespace

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::None: return "none";
    case Constraint::MuZero: return "mu_zero";
    case Constraint::DiagSigma: return "diag_sigma";
    case Constraint::NormalP1: return "normal_p1";
  }
  return "none";
}

Constraint parse_constraint(const std::string& s) {
  if (s == "none") return Constraint::None;
  if (s == "mu0" || s == "mu_zero") return Constraint::MuZero;
  if (s == "diag" || s == "diag_sigma") return Constraint::DiagSigma;
  if (s == "normal" || s == "normal_p1") return Constraint::NormalP1;
  throw InvalidParameter("unknown constraint '" + s + "' (expected none|mu0|diag|normal)");
}

void EmControl::validate() const {
  if (max_iter < 1) throw InvalidParameter("max_iter must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidParameter("EM rel_tol must be > 0");
  if (!(jitter >= 0.0)) throw InvalidParameter("jitter must be >= 0");
}

double observed_loglik(const DataMatrix& data, const MgsnParams& params, const SeriesControl& sctl) {
  return run_series(data, params, sctl, false).loglik;
}

EStepResult em_e_step(const DataMatrix& data, const MgsnParams& params, const SeriesControl& sctl) {
  SeriesPass pass = run_series(data, params, sctl, params.p() < 1.0);
  return {std::move(pass.a), std::move(pass.b), pass.loglik};
}

MStepResult em_m_step(const DataMatrix& data, const Vector& a, const Vector& b,
                      Constraint constraint, double jitter) {
  const int n = data.rows();
  const int d = data.cols();
  if (a.size() != n || b.size() != n) throw DimensionMismatch("weights do not match the data rows");
  const double sa = a.sum();
  if (!(sa > 0.0)) throw DegenerateUpdate("sum of E(N | x) weights is not positive");

  Vector mu = constraint == Constraint::MuZero
                  ? Vector(Vector::Zero(d))
                  : Vector(data.values().colwise().sum().transpose() / sa);
  Matrix sigma = scatter_bracket(data, a, b, mu) / static_cast<double>(n);
  if (constraint == Constraint::DiagSigma) sigma = Matrix(sigma.diagonal().asDiagonal());

  MStepResult out{std::move(mu), SymMatrix(), 0};
  out.sigma = make_positive_definite(std::move(sigma), jitter, &out.jitter_steps);
  return out;
}

double expected_complete_loglik(const DataMatrix& data, const Vector& a, const Vector& b,
                                const Vector& mu, const SymMatrix& sigma) {
  const CholFactor f = cholesky(sigma);
  const Matrix bracket = scatter_bracket(data, a, b, mu);
  const Matrix inv = f.inverse();
  return -0.5 * data.rows() * f.logdet() - 0.5 * (inv.cwiseProduct(bracket)).sum();
}

StartValue default_start(const DataMatrix& data, double p, Constraint constraint, InitMethod method) {
  require_enough_rows(data);
  const int d = data.cols();
  const Vector mean = sample_mean(data);
  const Matrix cov = sample_covariance(data);

  if (constraint == Constraint::MuZero) {
    const Matrix second = data.values().transpose() * data.values() / static_cast<double>(data.rows());
    return {Vector::Zero(d), make_positive_definite(second, 1e-10, nullptr)};
  }

  Vector mu = mean;
  Matrix sigma = cov;
  if (method == InitMethod::MethodOfMoments && p < 1.0) {
    const Matrix mom = p * cov - p * (1.0 - p) * (mean * mean.transpose());
    bool pd = true;
    try {
      cholesky(SymMatrix::symmetrized(constraint == Constraint::DiagSigma
                                          ? Matrix(mom.diagonal().asDiagonal())
                                          : mom));
    } catch (const NotPositiveDefinite&) {
      pd = false;
    }
    if (pd) {
      mu = p * mean;
      sigma = mom;
    }
  }
  if (constraint == Constraint::DiagSigma) sigma = Matrix(sigma.diagonal().asDiagonal());
  return {std::move(mu), make_positive_definite(std::move(sigma), 1e-10, nullptr)};
}

FitResult fit_normal(const DataMatrix& data) {
  require_enough_rows(data);
  const int n = data.rows();
  const MStepResult m = em_m_step(data, Vector::Ones(n), Vector::Ones(n), Constraint::None);
  MgsnParams params = build_params(1.0, m.mu, m.sigma);
  const double ll = observed_loglik(data, params);
  return {std::move(params), ll, 1, true, Constraint::NormalP1, {ll}, {}, {}};
}

FitResult em_fit(const DataMatrix& data, double p, Constraint constraint,
                 const std::optional<StartValue>& start, const EmControl& ctl,
                 const SeriesControl& sctl) {
  ctl.validate();
  sctl.validate();
  if (constraint == Constraint::NormalP1) return fit_normal(data);
  require_p(p);
  require_enough_rows(data);
  const int n = data.rows();

  if (p == 1.0) {
    const MStepResult m = em_m_step(data, Vector::Ones(n), Vector::Ones(n), constraint, ctl.jitter);
    MgsnParams params = build_params(1.0, m.mu, m.sigma);
    const double ll = observed_loglik(data, params, sctl);
    return {std::move(params), ll, 1, true, constraint, {ll}, {}, {}};
  }

  const StartValue init = start ? *start : default_start(data, p, constraint);
  if (init.mu.size() != data.cols() || init.sigma.dim() != data.cols()) {
    throw DimensionMismatch("start value does not match the data dimension");
  }
  Vector mu0 = init.mu;
  if (constraint == Constraint::MuZero) mu0.setZero();
  MgsnParams params = build_params(p, mu0, init.sigma);

  EStepResult e = em_e_step(data, params, sctl);
  std::vector<double> trace{e.loglik};
  const int iterations = ctl.paper_mode ? EmControl::kPaperIterations : ctl.max_iter;
  bool converged = false;
  int it = 0;
  while (it < iterations) {
    ++it;
    MStepResult m;
    try {
      m = em_m_step(data, e.a, e.b, constraint, ctl.jitter);
    } catch (const DegenerateUpdate& err) {
      throw DegenerateUpdate("EM iteration " + std::to_string(it) + " at p = " +
                             std::to_string(p) + ": " + err.what());
    }
    params = build_params(p, m.mu, m.sigma);
    const double previous = e.loglik;
    e = em_e_step(data, params, sctl);
    trace.push_back(e.loglik);
    const bool small = std::fabs(e.loglik - previous) <= ctl.rel_tol * std::fabs(previous);
    if (small) converged = true;
    if (small && !ctl.paper_mode) break;
  }
  const double ll = e.loglik;
  return {std::move(params), ll, it, converged, constraint, std::move(trace), {}, {}};
}

FitResult em_fit_fixed_p(const DataMatrix& data, double p, const std::optional<StartValue>& start,
                         const EmControl& ctl, const SeriesControl& sctl) {
  return em_fit(data, p, Constraint::None, start, ctl, sctl);
}

FitResult em_fit_mu_zero(const DataMatrix& data, double p, const EmControl& ctl,
                         const SeriesControl& sctl) {
  return em_fit(data, p, Constraint::MuZero, std::nullopt, ctl, sctl);
}

FitResult em_fit_diag(const DataMatrix& data, double p, const EmControl& ctl,
                      const SeriesControl& sctl) {
  return em_fit(data, p, Constraint::DiagSigma, std::nullopt, ctl, sctl);
}

std::vector<double> default_p_grid() { return parse_p_grid("0.02:0.02:1"); }

std::vector<double> parse_p_grid(const std::string& spec) {
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw InvalidParameter("bad grid value '" + s + "' in '" + spec + "'");
    return v;
  };
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 3) throw InvalidParameter("grid range must be lo:step:hi, got '" + spec + "'");
    const double lo = to_double(parts[0]);
    const double step = to_double(parts[1]);
    const double hi = to_double(parts[2]);
    if (!(step > 0.0) || !(lo <= hi)) throw InvalidParameter("grid range '" + spec + "' is empty");
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= count; ++i) grid.push_back(lo + i * step);
    if (hi - grid.back() > 1e-9 * step) grid.push_back(hi);
    else grid.back() = hi;
  } else {
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ',');) grid.push_back(to_double(tok));
  }
  return grid;
}

FitResult profile_fit(const DataMatrix& data, const std::vector<double>& grid,
                      const EmControl& ctl, const SeriesControl& sctl,
                      const ProfileOptions& options) {
  if (options.constraint == Constraint::NormalP1) {
    throw InvalidParameter("profile over p is not defined for the p = 1 model");
  }
  if (grid.empty()) throw InvalidParameter("empty p grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require_p(grid[i]);
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidParameter("p grid must be strictly increasing");
  }
  if (grid.back() != 1.0) throw InvalidParameter("p grid must include 1");
  require_enough_rows(data);

  std::vector<ProfilePoint> trace;
  std::vector<ProfileFailure> failures;
  std::optional<FitResult> best;
  std::optional<StartValue> warm;

  auto fit_at = [&](double p, const std::optional<StartValue>& start) -> std::optional<FitResult> {
    try {
      FitResult f = em_fit(data, p, options.constraint,
                           start ? start : std::optional<StartValue>(
                                               default_start(data, p, options.constraint, options.init)),
                           ctl, sctl);
      if (!std::isfinite(f.loglik)) throw DegenerateUpdate("non-finite log-likelihood");
      return f;
    } catch (const Error& e) {
      if (e.category() == Error::Category::Input) throw;
      failures.push_back({p, e.what()});
      return std::nullopt;
    }
  };

  for (double p : grid) {
    auto f = fit_at(p, options.warm_start ? warm : std::nullopt);
    if (!f) continue;
    trace.push_back({p, f->loglik, f->n_iter});
    warm = StartValue{f->params.mu(), f->params.sigma()};
    if (!best || f->loglik > best->loglik) best = std::move(f);
  }
  if (!best) {
    throw FitFailure("EM failed at every grid point; first failure: " + failures.front().message);
  }

  if (options.refine && !ctl.paper_mode && grid.size() >= 2) {
    const double p_best = best->params.p();
    const auto it = std::find(grid.begin(), grid.end(), p_best);
    const auto idx = static_cast<std::size_t>(it - grid.begin());
    double lo = grid[idx == 0 ? 0 : idx - 1];
    double hi = grid[std::min(idx + 1, grid.size() - 1)];
    const StartValue seed{best->params.mu(), best->params.sigma()};

    auto evaluate = [&](double p) {
      auto f = fit_at(p, seed);
      if (!f) return -std::numeric_limits<double>::infinity();
      const double ll = f->loglik;
      trace.push_back({p, ll, f->n_iter});
      if (ll > best->loglik) best = std::move(f);
      return ll;
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = evaluate(x1);
    double f2 = evaluate(x2);
    while (hi - lo > options.refine_tol) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = evaluate(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = evaluate(x2);
      }
    }
  }

  std::sort(trace.begin(), trace.end(),
            [](const ProfilePoint& l, const ProfilePoint& r) { return l.p < r.p; });
  trace.erase(std::unique(trace.begin(), trace.end(),
                          [](const ProfilePoint& l, const ProfilePoint& r) { return l.p == r.p; }),
              trace.end());

  FitResult out = std::move(*best);
  out.constraint = options.constraint;
  out.profile_trace = std::move(trace);
  out.failures = std::move(failures);
  return out;
}

}  // namespace mgsn
