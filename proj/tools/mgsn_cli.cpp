// mgsn: simulate, fit, test and tabulate the multivariate geometric
// skew-normal law from the command line.
//
// Exit status: 0 success, 2 bad input or flags, 3 numerical failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgsn/data.hpp"
#include "mgsn/distribution.hpp"
#include "mgsn/errors.hpp"
#include "mgsn/estimation.hpp"
#include "mgsn/inference.hpp"
#include "mgsn/sampling.hpp"
#include "mgsn/study.hpp"
#include "mgsn/version.hpp"

namespace {

using mgsn::Matrix;
using mgsn::Vector;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// Flat key = value report, kept in insertion order.
class KeyValues {
 public:
  void add(const std::string& key, const std::string& value) { items_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, fmt(value, 17)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, const Vector& v) {
    for (int i = 0; i < v.size(); ++i) add(key + "[" + std::to_string(i + 1) + "]", v(i));
  }
  void add(const std::string& key, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        add(key + "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]", m(i, j));
      }
    }
  }
  void write(std::ostream& out) const {
    for (const auto& [k, v] : items_) out << k << " = " << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

struct Common {
  std::string input;
  bool stiffness = false;
  bool raw = false;
  bool paper_mode = false;
  std::string grid;
  std::string out;
  std::string constraint = "none";
  std::optional<double> p;
  std::string mu;
  std::string sigma;
  std::string sigma_file;
  int n = 100;
  std::uint64_t seed = 42;
  std::string which = "normality";
  int table = 1;
  int replications = 100;
  int threads = 1;
  std::string preset;
  std::string range;
  int steps = 100;
  std::string trace;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size() || !std::isfinite(v)) {
      throw mgsn::ParseError(what + ": '" + token + "' is not a number");
    }
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') flush();
    else token += c;
  }
  flush();
  return out;
}

Vector parse_vector(const std::string& text, const std::string& what) {
  const auto v = parse_numbers(text, what);
  if (v.empty()) throw mgsn::InvalidParameter(what + " is empty");
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, const std::string& what) {
  if (rows.empty()) throw mgsn::InvalidParameter(what + " has no rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw mgsn::DimensionMismatch(what + ": row " + std::to_string(i + 1) + " has " +
                                    std::to_string(rows[i].size()) + " entries");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// Rows separated by ';', entries by ',' or blanks.
Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  for (std::string row; std::getline(ss, row, ';');) {
    auto v = parse_numbers(row, "--sigma");
    if (!v.empty()) rows.push_back(std::move(v));
  }
  return rows_to_matrix(rows, "--sigma");
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mgsn::ParseError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    line = line.substr(0, line.find('#'));
    auto v = parse_numbers(line, path);
    if (!v.empty()) rows.push_back(std::move(v));
  }
  return rows_to_matrix(rows, path);
}

mgsn::MgsnParams params_from_flags(const Common& c) {
  if (!c.p) throw mgsn::InvalidParameter("--p is required");
  if (c.mu.empty()) throw mgsn::InvalidParameter("--mu is required");
  if (c.sigma.empty() == c.sigma_file.empty()) {
    throw mgsn::InvalidParameter("give exactly one of --sigma and --sigma-file");
  }
  const Matrix s = c.sigma.empty() ? read_matrix_file(c.sigma_file) : parse_matrix(c.sigma);
  return mgsn::MgsnParams(*c.p, parse_vector(c.mu, "--mu"), mgsn::SymMatrix(s));
}

mgsn::DataMatrix load_data(const Common& c) {
  if (c.stiffness == !c.input.empty()) {
    throw mgsn::InvalidParameter("give exactly one of --input and --stiffness");
  }
  if (c.raw && !c.stiffness) throw mgsn::InvalidParameter("--raw applies to --stiffness only");
  return c.stiffness ? mgsn::stiffness_dataset(!c.raw) : mgsn::read_csv_file(c.input);
}

std::vector<double> grid_from_flags(const Common& c) {
  return c.grid.empty() ? mgsn::default_p_grid() : mgsn::parse_p_grid(c.grid);
}

mgsn::EmControl em_from_flags(const Common& c) {
  return c.paper_mode ? mgsn::EmControl::paper() : mgsn::EmControl{};
}

mgsn::SeriesControl series_from_flags(const Common& c) {
  return c.paper_mode ? mgsn::SeriesControl::paper() : mgsn::SeriesControl{};
}

void print_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << name << ":\n";
  for (int i = 0; i < m.rows(); ++i) {
    out << "  ";
    for (int j = 0; j < m.cols(); ++j) out << std::setw(12) << fmt(m(i, j), 6);
    out << '\n';
  }
}

void print_vector(std::ostream& out, const std::string& name, const Vector& v) {
  out << name << ":";
  for (int i = 0; i < v.size(); ++i) out << ' ' << fmt(v(i), 8);
  out << '\n';
}

void describe_fit(std::ostream& out, const std::string& title, const mgsn::FitResult& f) {
  out << title << " (constraint " << mgsn::to_string(f.constraint) << ")\n";
  out << "p: " << fmt(f.params.p(), 8) << '\n';
  out << "loglik: " << fmt(f.loglik, 10) << '\n';
  out << "iterations: " << f.n_iter << (f.converged ? "" : " (not converged)") << '\n';
  print_vector(out, "mu", f.params.mu());
  print_matrix(out, "sigma", f.params.sigma().matrix());
  for (const auto& fail : f.failures) out << "grid failure at p = " << fail.p << ": " << fail.message << '\n';
}

void record_fit(KeyValues& kv, const std::string& prefix, const mgsn::FitResult& f) {
  kv.add(prefix + "constraint", mgsn::to_string(f.constraint));
  kv.add(prefix + "p", f.params.p());
  kv.add(prefix + "loglik", f.loglik);
  kv.add(prefix + "iterations", f.n_iter);
  kv.add(prefix + "converged", f.converged ? "true" : "false");
  kv.add(prefix + "mu", f.params.mu());
  kv.add(prefix + "sigma", f.params.sigma().matrix());
}

void print_trace(std::ostream& out, const std::vector<mgsn::ProfilePoint>& trace) {
  out << "p,loglik\n";
  for (const auto& pt : trace) out << fmt(pt.p, 12) << ',' << fmt(pt.loglik, 12) << '\n';
}

// Everything needed to rerun the command: the subcommand's options with
// resolved values, the generator identity and the library version.
class Manifest {
 public:
  explicit Manifest(const CLI::App& sub) : command_(sub.get_name()) {
    for (const CLI::Option* opt : sub.get_options()) {
      const std::string name = opt->get_lnames().empty() ? "" : opt->get_lnames().front();
      if (name.empty() || name == "help") continue;
      std::string value;
      if (opt->count() > 0) {
        const auto& res = opt->results();
        value = opt->get_type_size() == 0 ? "true" : (res.empty() ? "" : res.front());
      } else {
        value = opt->get_type_size() == 0 ? "false" : opt->get_default_str();
      }
      flags_.emplace_back(name, value);
    }
  }

  void emit(std::ostream& out, KeyValues* kv, double seconds) const {
    out << "# run manifest\n";
    out << "#   command: " << command_ << '\n';
    for (const auto& [k, v] : flags_) out << "#   --" << k << ": " << (v.empty() ? "(unset)" : v) << '\n';
    out << "#   rng: " << mgsn::RngStream::kAlgorithm << " v" << mgsn::RngStream::kVersion << '\n';
    out << "#   version: " << mgsn::kVersion << '\n';
    out << "#   wall_clock_s: " << fmt(seconds, 4) << '\n';
    if (kv) {
      kv->add("manifest.command", command_);
      for (const auto& [k, v] : flags_) kv->add("manifest.flag." + k, v);
      kv->add("manifest.rng", std::string(mgsn::RngStream::kAlgorithm) + " v" +
                                  std::string(mgsn::RngStream::kVersion));
      kv->add("manifest.version", std::string(mgsn::kVersion));
      kv->add("manifest.wall_clock_s", fmt(seconds, 4));
    }
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> flags_;
};

void write_report(const std::string& path, const KeyValues& kv) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw mgsn::ParseError("cannot write '" + path + "'");
  kv.write(out);
}

void add_control_entries(KeyValues& kv, const mgsn::EmControl& em, const mgsn::SeriesControl& sc) {
  kv.add("control.series_terms", sc.paper_mode ? mgsn::SeriesControl::kPaperTerms : sc.k_max);
  kv.add("control.series_rel_tol", sc.rel_tol);
  kv.add("control.em_iterations",
         em.paper_mode ? mgsn::EmControl::kPaperIterations : em.max_iter);
  kv.add("control.em_rel_tol", em.rel_tol);
  kv.add("control.paper_mode", em.paper_mode ? "true" : "false");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int cmd_simulate(const Common& c, const CLI::App& sub) {
  const auto t0 = Clock::now();
  const mgsn::MgsnParams params = params_from_flags(c);
  if (c.n < 1) throw mgsn::InvalidParameter("--n must be >= 1");
  mgsn::RngStream rng(c.seed, 0);
  const mgsn::DataMatrix data = mgsn::sample_mgsn(rng, params, c.n);
  Manifest manifest(sub);
  if (c.out.empty()) {
    mgsn::write_csv(std::cout, data);
    manifest.emit(std::cerr, nullptr, seconds_since(t0));
  } else {
    std::ofstream out(c.out);
    if (!out) throw mgsn::ParseError("cannot write '" + c.out + "'");
    mgsn::write_csv(out, data);
    std::cout << "wrote " << data.rows() << " x " << data.cols() << " sample to " << c.out << '\n';
    manifest.emit(std::cout, nullptr, seconds_since(t0));
  }
  return 0;
}

int cmd_fit(const Common& c, const CLI::App& sub) {
  const auto t0 = Clock::now();
  const mgsn::DataMatrix data = load_data(c);
  const mgsn::Constraint constraint = mgsn::parse_constraint(c.constraint);
  const auto em = em_from_flags(c);
  const auto sc = series_from_flags(c);

  mgsn::FitResult fit = [&] {
    if (constraint == mgsn::Constraint::NormalP1) return mgsn::fit_normal(data);
    if (c.p) return mgsn::em_fit(data, *c.p, constraint, std::nullopt, em, sc);
    mgsn::ProfileOptions po;
    po.constraint = constraint;
    return mgsn::profile_fit(data, grid_from_flags(c), em, sc, po);
  }();

  std::cout << "n = " << data.rows() << ", d = " << data.cols() << '\n';
  describe_fit(std::cout, "fit", fit);
  KeyValues kv;
  kv.add("n", data.rows());
  kv.add("d", data.cols());
  record_fit(kv, "", fit);
  add_control_entries(kv, em, sc);
  if (!fit.profile_trace.empty()) {
    std::cout << "profile trace:\n";
    print_trace(std::cout, fit.profile_trace);
    if (!c.trace.empty()) {
      std::ofstream out(c.trace);
      if (!out) throw mgsn::ParseError("cannot write '" + c.trace + "'");
      print_trace(out, fit.profile_trace);
    }
  }
  Manifest(sub).emit(std::cout, &kv, seconds_since(t0));
  write_report(c.out, kv);
  return 0;
}

int cmd_test(const Common& c, const CLI::App& sub) {
  const auto t0 = Clock::now();
  const mgsn::DataMatrix data = load_data(c);
  mgsn::LrtOptions opt;
  opt.grid = grid_from_flags(c);
  opt.em = em_from_flags(c);
  opt.series = series_from_flags(c);

  mgsn::LrtResult r = [&] {
    if (c.which == "normality") return mgsn::lrt_normality(data, opt);
    if (c.which == "symmetry") return mgsn::lrt_symmetry(data, opt);
    if (c.which == "diagonal") return mgsn::lrt_diagonal(data, opt);
    throw mgsn::InvalidParameter("--which must be normality, symmetry or diagonal");
  }();

  std::cout << "test: " << c.which << '\n';
  std::cout << "statistic: " << fmt(r.statistic, 10) << (r.clamped ? " (clamped from a tiny negative)" : "")
            << '\n';
  std::cout << "reference: " << r.reference.describe() << '\n';
  std::cout << "p-value: " << fmt(r.p_value, 6) << "\n\n";
  describe_fit(std::cout, "null model", r.null_fit);
  std::cout << '\n';
  describe_fit(std::cout, "alternative model", r.alt_fit);

  KeyValues kv;
  kv.add("test", c.which);
  kv.add("statistic", r.statistic);
  kv.add("reference", r.reference.describe());
  kv.add("df", r.reference.df);
  kv.add("p_value", r.p_value);
  record_fit(kv, "null.", r.null_fit);
  record_fit(kv, "alt.", r.alt_fit);
  add_control_entries(kv, opt.em, opt.series);
  Manifest(sub).emit(std::cout, &kv, seconds_since(t0));
  write_report(c.out, kv);
  return 0;
}

int cmd_moments(const Common& c, const CLI::App& sub) {
  const auto t0 = Clock::now();
  const mgsn::MgsnParams params = params_from_flags(c);
  const mgsn::MomentSummary m = mgsn::mgsn_moments(params);
  const mgsn::MomentRelation rel = mgsn::moment_relation(params);
  const double mean_gap = (params.p() * rel.mean - params.mu()).cwiseAbs().maxCoeff();
  const Matrix lhs = params.p() * params.p() * rel.dispersion.matrix();
  const Matrix rhs = params.p() * params.sigma().matrix() +
                     (1.0 - params.p()) * params.mu() * params.mu().transpose();
  const double disp_gap = (lhs - rhs).cwiseAbs().maxCoeff();
  const double cov_gap = (m.covariance.matrix() - rel.dispersion.matrix()).cwiseAbs().maxCoeff();

  print_vector(std::cout, "mean", m.mean);
  print_matrix(std::cout, "covariance", m.covariance.matrix());
  print_matrix(std::cout, "correlation", m.correlation.matrix());
  std::cout << "mardia_beta1: " << fmt(m.mardia_beta1) << '\n';
  std::cout << "relation check: max|p*mean - mu| = " << fmt(mean_gap, 3)
            << ", max|p^2 D - (p Sigma + (1-p) mu mu')| = " << fmt(disp_gap, 3)
            << ", max|cov - D| = " << fmt(cov_gap, 3) << '\n';

  KeyValues kv;
  kv.add("mean", m.mean);
  kv.add("covariance", m.covariance.matrix());
  kv.add("correlation", m.correlation.matrix());
  kv.add("mardia_beta1", m.mardia_beta1);
  kv.add("relation.mean_gap", mean_gap);
  kv.add("relation.dispersion_gap", disp_gap);
  Manifest(sub).emit(std::cout, &kv, seconds_since(t0));
  write_report(c.out, kv);
  return 0;
}

int cmd_pdf_grid(const Common& c, const CLI::App& sub) {
  const auto t0 = Clock::now();
  std::optional<mgsn::MgsnParams> params;
  if (!c.preset.empty()) {
    if (c.p || !c.mu.empty() || !c.sigma.empty() || !c.sigma_file.empty()) {
      throw mgsn::InvalidParameter("--preset cannot be combined with --p/--mu/--sigma");
    }
    for (const auto& pr : mgsn::fig1_presets()) {
      if (c.preset.size() == 1 && c.preset[0] == pr.name) params = pr.params();
    }
    if (!params) throw mgsn::InvalidParameter("unknown preset '" + c.preset + "' (a, b, c or d)");
  } else {
    params = params_from_flags(c);
  }
  if (params->dim() != 2) {
    throw mgsn::DimensionMismatch("pdf-grid needs a bivariate law, got d = " +
                                  std::to_string(params->dim()));
  }
  if (c.steps < 1) throw mgsn::InvalidParameter("--steps must be >= 1");

  double lo[2], hi[2];
  if (c.range.empty()) {
    const auto m = mgsn::mgsn_moments(*params);
    for (int k = 0; k < 2; ++k) {
      const double sd = std::sqrt(m.covariance(k, k));
      lo[k] = m.mean(k) - 6.0 * sd;
      hi[k] = m.mean(k) + 6.0 * sd;
    }
  } else {
    const auto r = parse_numbers(c.range, "--range");
    if (r.size() == 2) {
      lo[0] = lo[1] = r[0];
      hi[0] = hi[1] = r[1];
    } else if (r.size() == 4) {
      lo[0] = r[0], hi[0] = r[1], lo[1] = r[2], hi[1] = r[3];
    } else {
      throw mgsn::InvalidParameter("--range takes lo,hi or xlo,xhi,ylo,yhi");
    }
    if (!(lo[0] < hi[0] && lo[1] < hi[1])) throw mgsn::InvalidParameter("--range is empty");
  }

  std::ofstream file;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) throw mgsn::ParseError("cannot write '" + c.out + "'");
  }
  std::ostream& out = c.out.empty() ? std::cout : file;
  out << "x,y,pdf\n";
  const double hx = (hi[0] - lo[0]) / c.steps;
  const double hy = (hi[1] - lo[1]) / c.steps;
  Vector x(2);
  for (int i = 0; i <= c.steps; ++i) {
    for (int j = 0; j <= c.steps; ++j) {
      x << lo[0] + i * hx, lo[1] + j * hy;
      out << fmt(x(0), 12) << ',' << fmt(x(1), 12) << ','
          << fmt(std::exp(mgsn::mgsn_logpdf(x, *params)), 12) << '\n';
    }
  }
  Manifest(sub).emit(c.out.empty() ? std::cerr : std::cout, nullptr, seconds_since(t0));
  return 0;
}

int cmd_bench_tables(const Common& c, const CLI::App& sub) {
  const auto t0 = Clock::now();
  if (c.replications < 10) throw mgsn::InvalidParameter("--replications must be >= 10");
  mgsn::StudyConfig cfg;
  cfg.table = c.table;
  cfg.replications = c.replications;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.em = em_from_flags(c);
  cfg.series = series_from_flags(c);
  cfg.grid = grid_from_flags(c);
  const mgsn::ReferenceTable& ref = mgsn::reference_table(c.table);
  const mgsn::StudySummary s = mgsn::run_study(cfg);
  const mgsn::MgsnParams truth = mgsn::study_params(ref.p);

  std::cout << "table " << ref.id << ": p = " << ref.p << (ref.p_known ? " (known)" : " (unknown)")
            << ", n = " << cfg.n << ", replications = " << s.completed << '/' << c.replications
            << '\n';
  std::cout << std::left << std::setw(12) << "parameter" << std::right << std::setw(10) << "true"
            << std::setw(12) << "average" << std::setw(12) << "mse" << std::setw(12) << "ref avg"
            << std::setw(12) << "ref (.)" << '\n';
  auto row = [](const std::string& name, double truth_v, double avg, double mse, double pavg,
                double pmse) {
    std::cout << std::left << std::setw(12) << name << std::right << std::fixed
              << std::setprecision(4) << std::setw(10) << truth_v << std::setw(12) << avg
              << std::setw(12) << mse << std::setw(12) << pavg << std::setw(12) << pmse << '\n'
              << std::defaultfloat;
  };
  KeyValues kv;
  kv.add("table", ref.id);
  kv.add("replications", c.replications);
  kv.add("completed", s.completed);
  for (int i = 0; i < 4; ++i) {
    row("mu" + std::to_string(i + 1), truth.mu()(i), s.mu_avg(i), s.mu_mse(i), ref.mu_avg[i],
        ref.mu_mse[i]);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      row("sigma" + std::to_string(i + 1) + std::to_string(j + 1), truth.sigma()(i, j),
          s.sigma_avg(i, j), s.sigma_mse(i, j), ref.sigma_avg[i][j], ref.sigma_mse[i][j]);
    }
  }
  if (!ref.p_known) row("p", ref.p, s.p_avg, s.p_mse, ref.p_avg, ref.p_mse);
  kv.add("mu_avg", s.mu_avg);
  kv.add("mu_mse", s.mu_mse);
  kv.add("sigma_avg", s.sigma_avg);
  kv.add("sigma_mse", s.sigma_mse);
  if (!ref.p_known) {
    kv.add("p_avg", s.p_avg);
    kv.add("p_mse", s.p_mse);
  }
  for (const auto& f : s.failures) {
    std::cerr << "replication " << f.replication << " failed: " << f.message << '\n';
  }
  Manifest(sub).emit(std::cout, &kv, seconds_since(t0));
  write_report(c.out, kv);
  return s.failures.empty() ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate geometric skew-normal toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mgsn::kVersion);
  Common c;

  auto add_params = [&](CLI::App* s) {
    s->add_option("--p", c.p, "Geometric success probability in (0, 1]");
    s->add_option("--mu", c.mu, "Location vector, comma separated");
    s->add_option("--sigma", c.sigma, "Dispersion matrix, rows separated by ';'");
    s->add_option("--sigma-file", c.sigma_file, "Dispersion matrix file, one row per line");
  };
  auto add_data = [&](CLI::App* s) {
    s->add_option("--input", c.input, "CSV file with a header row");
    s->add_flag("--stiffness", c.stiffness, "Use the embedded 30 x 4 board-stiffness data");
    s->add_flag("--raw", c.raw, "Do not divide the stiffness data by 100");
    s->add_option("--grid", c.grid, "p grid: lo:step:hi or a comma list (default 0.02:0.02:1)");
    s->add_flag("--paper-mode", c.paper_mode, "50 series terms and exactly 20 EM iterations");
  };

  auto* sim = app.add_subcommand("simulate", "Draw a sample to CSV");
  add_params(sim);
  sim->add_option("--n", c.n, "Sample size")->capture_default_str();
  sim->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sim->add_option("--out", c.out, "Output CSV (default: standard output)");

  auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit");
  add_data(fit);
  fit->add_option("--constraint", c.constraint, "none|mu0|diag|normal")->capture_default_str();
  fit->add_option("--p", c.p, "Fix p instead of profiling over the grid");
  fit->add_option("--out", c.out, "key = value report file");
  fit->add_option("--trace", c.trace, "Profile trace CSV (p,loglik)");

  auto* test = app.add_subcommand("test", "Likelihood-ratio test");
  add_data(test);
  test->add_option("--which", c.which, "normality|symmetry|diagonal")->capture_default_str();
  test->add_option("--out", c.out, "key = value report file");

  auto* mom = app.add_subcommand("moments", "Mean, covariance, correlation and skewness");
  add_params(mom);
  mom->add_option("--out", c.out, "key = value report file");

  auto* pdf = app.add_subcommand("pdf-grid", "Bivariate density on a regular grid");
  add_params(pdf);
  pdf->add_option("--preset", c.preset, "Named parameter set a, b, c or d");
  pdf->add_option("--range", c.range, "lo,hi or xlo,xhi,ylo,yhi (default mean +- 6 sd)");
  pdf->add_option("--steps", c.steps, "Grid intervals per axis")->capture_default_str();
  pdf->add_option("--out", c.out, "Output CSV (default: standard output)");

  auto* bench = app.add_subcommand("bench-tables", "Simulation study for the d = 4 design");
  bench->add_option("--table", c.table, "1: p=0.5 known, 2: p=0.5 unknown, 3: p=0.75 known, 4: p=0.75 unknown")
      ->capture_default_str();
  bench->add_option("--replications", c.replications, "Replications (>= 10)")->capture_default_str();
  bench->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  bench->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
  bench->add_option("--grid", c.grid, "p grid for the unknown-p tables");
  bench->add_flag("--paper-mode", c.paper_mode, "50 series terms and exactly 20 EM iterations");
  bench->add_option("--out", c.out, "key = value report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*sim) return cmd_simulate(c, *sim);
    if (*fit) return cmd_fit(c, *fit);
    if (*test) return cmd_test(c, *test);
    if (*mom) return cmd_moments(c, *mom);
    if (*pdf) return cmd_pdf_grid(c, *pdf);
    if (*bench) return cmd_bench_tables(c, *bench);
  } catch (const mgsn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == mgsn::Error::Category::Input ? kExitInput : kExitNumerical;
  }
  return kExitInput;
}
