#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mgsn/errors.hpp"
#include "mgsn/estimation.hpp"
#include "mgsn/sampling.hpp"
#include "mgsn/study.hpp"
#include "oracles.hpp"

using namespace mgsn;

namespace {

DataMatrix simulate(const MgsnParams& prm, int n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return sample_mgsn(rng, prm, n);
}

MgsnParams random_params(std::mt19937_64& gen, int d, double p) {
  std::normal_distribution<double> z;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = z(gen);
  Vector mu(d);
  for (int i = 0; i < d; ++i) mu(i) = z(gen);
  return MgsnParams(p, mu, SymMatrix::symmetrized(a * a.transpose() / d + 0.5 * Matrix::Identity(d, d)));
}

double gaussian_loglik_closed_form(const DataMatrix& x) {
  const Matrix s = sample_covariance(x);
  const int n = x.rows(), d = x.cols();
  return -0.5 * n * (d * std::log(2 * M_PI) + std::log(s.determinant()) + d);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void check_ascent(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] - trace[i - 1] >= -1e-8);
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("embedded stiffness table") {
  const DataMatrix raw = stiffness_dataset(false);
  REQUIRE(raw.rows() == 30);
  REQUIRE(raw.cols() == 4);
  CHECK(raw.row(0) == (Vector(4) << 1889, 1651, 1561, 1778).finished());
  CHECK(raw.row(29) == (Vector(4) << 1490, 1382, 1214, 1284).finished());
  CHECK(raw.labels() == std::vector<std::string>{"x1", "x2", "x3", "x4"});
  const DataMatrix scaled = stiffness_dataset();
  CHECK(scaled.values()(0, 0) == 18.89);
  const Vector m = sample_mean(scaled);
  const Vector ref = (Vector(4) << 19.0610, 17.4953, 15.0790, 17.2497).finished();
  CHECK((m - ref).cwiseAbs().maxCoeff() < 5e-5);
}

TEST_CASE("CSV round trip is exact") {
  const DataMatrix x = stiffness_dataset();
  std::stringstream ss;
  write_csv(ss, x);
  const DataMatrix y = read_csv(ss);
  CHECK(y.values() == x.values());
  CHECK(y.labels() == x.labels());

  RngStream rng(1);
  const DataMatrix z = sample_mgsn(rng, study_params(0.3), 40);
  std::stringstream s2;
  write_csv(s2, z);
  CHECK(read_csv(s2).values() == z.values());
}

TEST_CASE("CSV errors name the line and column") {
  std::stringstream bad_cell("a,b\n1,2\n3,oops\n");
  try {
    read_csv(bad_cell);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
  std::stringstream arity("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(arity), ParseError);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), ParseError);
  std::stringstream header_only("a,b\n");
  CHECK_THROWS_AS(read_csv(header_only), ParseError);
  std::stringstream ok(" a , b \n 1.5 , -2e3 \n\n+3,4\n");
  const DataMatrix d = read_csv(ok);
  CHECK(d.rows() == 2);
  CHECK(d.values()(0, 1) == -2000.0);
  CHECK(d.labels()[0] == "a");
}

}

TEST_SUITE("estimation") {

TEST_CASE("observed log-likelihood basics") {
  for (int d : {1, 3}) {
    const Vector mu = Vector::LinSpaced(d, 0.5, 1.5);
    const DataMatrix one(mu.transpose());
    CHECK(observed_loglik(one, MgsnParams(1.0, mu, SymMatrix::identity(d))) ==
          doctest::Approx(-0.5 * d * std::log(2 * M_PI)));
  }
  const DataMatrix s = stiffness_dataset();
  const FitResult g = fit_normal(s);
  CHECK(g.loglik == doctest::Approx(gaussian_loglik_closed_form(s)).epsilon(1e-12));
  CHECK_THROWS_AS(observed_loglik(s, MgsnParams(0.5, Vector::Zero(2), SymMatrix::identity(2))),
                  DimensionMismatch);
}

TEST_CASE("E-step weights") {
  const DataMatrix x = simulate(study_params(0.5), 50, 3);
  const EStepResult one = em_e_step(x, study_params(1.0));
  CHECK(one.a == Vector::Ones(50));
  CHECK(one.b == Vector::Ones(50));

  const MgsnParams prm = study_params(0.35);
  const EStepResult e = em_e_step(x, prm);
  CHECK(e.a.minCoeff() >= 1.0);
  CHECK(e.b.maxCoeff() <= 1.0);
  CHECK(e.b.minCoeff() > 0.0);
  CHECK(std::fabs(e.loglik - observed_loglik(x, prm)) < 1e-9);
  for (int i = 0; i < 50; i += 7) {
    const auto ref = oracle::direct_series(x.row(i), 0.35, prm.mu(), prm.sigma().matrix());
    CHECK(e.a(i) == doctest::Approx(static_cast<double>(ref.mean_n)).epsilon(1e-10));
    CHECK(e.b(i) == doctest::Approx(static_cast<double>(ref.mean_inv_n)).epsilon(1e-10));
  }

  Matrix origin(1, 1);
  origin << 0.0;
  const EStepResult o = em_e_step(DataMatrix(origin), MgsnParams(0.5, Vector::Zero(1), SymMatrix::identity(1)));
  long double s0 = 0, s1 = 0, sm = 0;
  for (int k = 1; k <= 10000; ++k) {
    const long double w = std::pow(0.5L, k - 1) / std::sqrt(static_cast<long double>(k));
    s0 += w;
    s1 += w * k;
    sm += w / k;
  }
  CHECK(o.a(0) == doctest::Approx(static_cast<double>(s1 / s0)).epsilon(1e-12));
  CHECK(o.b(0) == doctest::Approx(static_cast<double>(sm / s0)).epsilon(1e-12));
}

TEST_CASE("M-step reduces to the Gaussian MLE with unit weights") {
  const DataMatrix x = simulate(study_params(0.6), 80, 4);
  const MStepResult m = em_m_step(x, Vector::Ones(80), Vector::Ones(80));
  CHECK((m.mu - sample_mean(x)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m.sigma.matrix() - sample_covariance(x)).cwiseAbs().maxCoeff() < 1e-10);

  Matrix two(2, 1);
  two << -1.0, 1.0;
  const MStepResult t = em_m_step(DataMatrix(two), Vector::Ones(2), Vector::Ones(2));
  CHECK(t.mu(0) == doctest::Approx(0.0));
  CHECK(t.sigma(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(em_m_step(DataMatrix(two), Vector::Zero(2), Vector::Ones(2)), DegenerateUpdate);
  CHECK_THROWS_AS(em_m_step(DataMatrix(two), Vector::Ones(3), Vector::Ones(3)), DimensionMismatch);
}

TEST_CASE("M-step maximizes the expected complete-data log-likelihood") {
  const DataMatrix x = simulate(study_params(0.5), 100, 5);
  const EStepResult e = em_e_step(x, study_params(0.5));
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  for (Constraint c : {Constraint::None, Constraint::MuZero, Constraint::DiagSigma}) {
    const MStepResult m = em_m_step(x, e.a, e.b, c);
    const double best = expected_complete_loglik(x, e.a, e.b, m.mu, m.sigma);
    for (int r = 0; r < 100; ++r) {
      Vector mu = m.mu;
      if (c != Constraint::MuZero)
        for (int i = 0; i < 4; ++i) mu(i) += 0.05 * z(gen);
      Matrix s = m.sigma.matrix();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j <= i; ++j) {
          if (c == Constraint::DiagSigma && i != j) continue;
          const double delta = 0.05 * z(gen);
          s(i, j) += delta;
          if (i != j) s(j, i) += delta;
        }
      SymMatrix sym = SymMatrix::symmetrized(s);
      try {
        cholesky(sym);
      } catch (const NotPositiveDefinite&) {
        continue;
      }
      CHECK(expected_complete_loglik(x, e.a, e.b, mu, sym) <= best + 1e-9);
    }
  }
}

TEST_CASE("constrained M-steps") {
  const DataMatrix x = simulate(study_params(0.5), 60, 6);
  const Vector a = Vector::Constant(60, 1.7), b = Vector::Constant(60, 0.8);
  const MStepResult z = em_m_step(x, a, b, Constraint::MuZero);
  CHECK(z.mu == Vector::Zero(4));
  const Matrix xtbx = x.values().transpose() * b.asDiagonal() * x.values() / 60.0;
  CHECK((z.sigma.matrix() - xtbx).cwiseAbs().maxCoeff() < 1e-12);
  const MStepResult full = em_m_step(x, a, b, Constraint::None);
  const MStepResult dg = em_m_step(x, a, b, Constraint::DiagSigma);
  CHECK(dg.mu == full.mu);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(dg.sigma(i, j) == (i == j ? full.sigma(i, j) : 0.0));
}

TEST_CASE("fixed-p fits at p = 1 are closed form") {
  const DataMatrix x = simulate(study_params(0.7), 40, 7);
  const FitResult f = em_fit_fixed_p(x, 1.0);
  CHECK(f.converged);
  CHECK(f.n_iter == 1);
  CHECK((f.params.mu() - sample_mean(x)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((f.params.sigma().matrix() - sample_covariance(x)).cwiseAbs().maxCoeff() < 1e-10);

  const FitResult z = em_fit_mu_zero(x, 1.0);
  const Matrix second = x.values().transpose() * x.values() / 40.0;
  CHECK((z.params.sigma().matrix() - second).cwiseAbs().maxCoeff() < 1e-10);

  const FitResult dg = em_fit_diag(x, 1.0);
  CHECK((dg.params.mu() - sample_mean(x)).cwiseAbs().maxCoeff() < 1e-12);
  const Vector var = sample_covariance(x).diagonal();
  for (int i = 0; i < 4; ++i) CHECK(dg.params.sigma()(i, i) == doctest::Approx(var(i)));
}

TEST_CASE("paper mode runs exactly 20 iterations") {
  const DataMatrix x = simulate(study_params(0.5), 100, 8);
  const FitResult f = em_fit_fixed_p(x, 0.5, std::nullopt, EmControl::paper(), SeriesControl::paper());
  CHECK(f.n_iter == 20);
  CHECK(f.loglik_trace.size() == 21);
}

TEST_CASE("EM ascent on random datasets for all three variants") {
  std::mt19937_64 gen(12);
  const int dims[] = {1, 2, 4};
  const double ps[] = {0.3, 0.6, 0.9};
  for (int r = 0; r < 20; ++r) {
    const int d = dims[r % 3];
    const double p = ps[(r / 3) % 3];
    const MgsnParams truth = random_params(gen, d, p);
    const DataMatrix x = simulate(truth, 60 + 10 * d, 100 + r);
    for (Constraint c : {Constraint::None, Constraint::MuZero, Constraint::DiagSigma}) {
      const FitResult f = em_fit(x, p, c, std::nullopt);
      INFO("dataset " << r << " constraint " << to_string(c));
      check_ascent(f.loglik_trace);
      CHECK(f.loglik == f.loglik_trace.back());
    }
  }
}

TEST_CASE("nested fits are ordered") {
  const DataMatrix x = simulate(study_params(0.5), 100, 9);
  for (double p : {0.3, 0.5, 0.8}) {
    const double full = em_fit_fixed_p(x, p).loglik;
    CHECK(em_fit_mu_zero(x, p).loglik <= full + 1e-6);
    CHECK(em_fit_diag(x, p).loglik <= full + 1e-6);
  }
  const FitResult prof = profile_fit(x, default_p_grid());
  CHECK(fit_normal(x).loglik <= prof.loglik);
}

TEST_CASE("profile fit trace and maximum") {
  const DataMatrix x = simulate(study_params(0.5), 100, 10);
  const FitResult f = profile_fit(x, default_p_grid());
  REQUIRE(f.profile_trace.size() >= 50);
  double best = -INFINITY;
  for (std::size_t i = 0; i < f.profile_trace.size(); ++i) {
    CHECK(std::isfinite(f.profile_trace[i].loglik));
    if (i > 0) CHECK(f.profile_trace[i].p > f.profile_trace[i - 1].p);
    best = std::max(best, f.profile_trace[i].loglik);
  }
  CHECK(f.loglik == best);
  CHECK(f.failures.empty());
  CHECK(f.params.p() > 0.3);
  CHECK(f.params.p() < 0.8);

  const FitResult coarse = profile_fit(x, default_p_grid(), EmControl::paper(), SeriesControl::paper());
  CHECK(coarse.profile_trace.size() == 50);
  CHECK(std::fabs(coarse.params.p() * 50 - std::round(coarse.params.p() * 50)) < 1e-9);
}

TEST_CASE("profile input checks") {
  const DataMatrix x = simulate(study_params(0.5), 30, 11);
  CHECK_THROWS_AS(profile_fit(x, {0.2, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(profile_fit(x, {0.5, 0.2, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(profile_fit(x, {}), InvalidParameter);
  CHECK_THROWS_AS(profile_fit(x, {0.0, 1.0}), InvalidParameter);
  ProfileOptions po;
  po.constraint = Constraint::NormalP1;
  CHECK_THROWS_AS(profile_fit(x, default_p_grid(), {}, {}, po), InvalidParameter);
}

TEST_CASE("too few rows is a degenerate update") {
  Matrix two(2, 2);
  two << 1.0, 2.0, 3.0, 5.0;
  CHECK_THROWS_AS(profile_fit(DataMatrix(two), default_p_grid()), DegenerateUpdate);
  CHECK_THROWS_AS(fit_normal(DataMatrix(two)), DegenerateUpdate);
}

TEST_CASE("grid and constraint parsing") {
  const auto g = parse_p_grid("0.02:0.02:1");
  REQUIRE(g.size() == 50);
  CHECK(g.back() == 1.0);
  CHECK(g == default_p_grid());
  CHECK(parse_p_grid("0.1,0.5,1") == std::vector<double>{0.1, 0.5, 1.0});
  CHECK(parse_p_grid("0.25:0.25:1").size() == 4);
  CHECK_THROWS_AS(parse_p_grid("0.1:x:1"), InvalidParameter);
  CHECK_THROWS_AS(parse_p_grid("1:0.1:0.5"), InvalidParameter);
  CHECK_THROWS_AS(parse_p_grid("0.1,,1"), InvalidParameter);
  CHECK(parse_constraint("mu0") == Constraint::MuZero);
  CHECK(parse_constraint("diag") == Constraint::DiagSigma);
  CHECK(parse_constraint("normal") == Constraint::NormalP1);
  CHECK(parse_constraint("none") == Constraint::None);
  CHECK_THROWS_AS(parse_constraint("banana"), InvalidParameter);
}

TEST_CASE("scale equivariance on the stiffness data") {
  const DataMatrix raw = stiffness_dataset(false);
  const DataMatrix scaled = stiffness_dataset(true);
  const FitResult fr = profile_fit(raw, default_p_grid());
  const FitResult fs = profile_fit(scaled, default_p_grid());
  const double c = 0.01;
  CHECK(fs.params.p() == doctest::Approx(fr.params.p()).epsilon(1e-3));
  CHECK(fs.loglik == doctest::Approx(fr.loglik - 30 * 4 * std::log(c)).epsilon(1e-8));
  CHECK((fs.params.mu() - c * fr.params.mu()).cwiseAbs().maxCoeff() < 1e-2);
  CHECK((fs.params.sigma().matrix() - c * c * fr.params.sigma().matrix()).cwiseAbs().maxCoeff() < 5e-2);
  CHECK(fit_normal(scaled).loglik == doctest::Approx(fit_normal(raw).loglik - 120 * std::log(c)));
}

TEST_CASE("moment-inversion start") {
  const DataMatrix x = simulate(study_params(0.4), 200, 13);
  const StartValue s = default_start(x, 0.4, Constraint::None, InitMethod::MethodOfMoments);
  CHECK((s.mu - 0.4 * sample_mean(x)).cwiseAbs().maxCoeff() < 1e-12);
  const FitResult a = em_fit(x, 0.4, Constraint::None, s);
  const FitResult b = em_fit(x, 0.4, Constraint::None, std::nullopt);
  CHECK(a.loglik == doctest::Approx(b.loglik).epsilon(1e-6));
}

TEST_CASE("fixed p = 0.5 on study data lands near the published averages") {
  const ReferenceTable& t1 = reference_table(1);
  const DataMatrix x = simulate(study_params(0.5), 100, 14);
  const FitResult f = em_fit_fixed_p(x, 0.5);
  for (int i = 0; i < 4; ++i) CHECK(std::fabs(f.params.mu()(i) - t1.mu_avg[i]) < 3 * std::sqrt(t1.mu_mse[i]));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::fabs(f.params.sigma()(i, j) - t1.sigma_avg[i][j]) < 3 * std::sqrt(t1.sigma_mse[i][j]));
}

TEST_CASE("Gaussian data profile near p = 1") {
  std::mt19937_64 gen(15);
  int high = 0;
  for (int r = 0; r < 20; ++r) {
    const MgsnParams truth = random_params(gen, 2, 1.0);
    const FitResult f = profile_fit(simulate(truth, 200, 300 + r), default_p_grid());
    high += f.params.p() >= 0.95;
  }
  CHECK(high > 10);
}

TEST_CASE("constrained fits under their null hypotheses") {
  std::vector<double> gap_mu, gap_diag;
  const MgsnParams sym(0.5, Vector::Zero(4), study_params(0.5).sigma());
  Matrix dg = Matrix::Zero(2, 2);
  dg(0, 0) = 1.0;
  dg(1, 1) = 2.0;
  const MgsnParams indep(0.5, Vector::Zero(2), SymMatrix(dg));
  for (int r = 0; r < 20; ++r) {
    const DataMatrix xs = simulate(sym, 100, 400 + r);
    gap_mu.push_back(em_fit_fixed_p(xs, 0.5).loglik - em_fit_mu_zero(xs, 0.5).loglik);
    // Independent columns: each coordinate an independent GSN draw.
    RngStream rng(500 + r);
    Matrix v(100, 2);
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 2; ++j) {
        const auto k = sample_geometric(rng, 0.5);
        v(i, j) = std::sqrt(static_cast<double>(k) * dg(j, j)) * rng.normal();
      }
    const DataMatrix xi(v);
    gap_diag.push_back(em_fit_fixed_p(xi, 0.5).loglik - em_fit_diag(xi, 0.5).loglik);
  }
  CHECK(median(gap_mu) < 3.0);
  CHECK(median(gap_diag) < 3.0);
  for (double g : gap_mu) CHECK(g >= -1e-6);
  for (double g : gap_diag) CHECK(g >= -1e-6);
}

}
