#include "mgsn/study.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "mgsn/errors.hpp"
#include "mgsn/sampling.hpp"

namespace mgsn {

namespace {

const ReferenceTable kTables[4] = {
    {1, 0.5, true,
     {0.0053, 0.0047, 1.0097, 1.0055},
     {0.0984, 0.1213, 0.1430, 0.1237},
     {{2.0024, 1.9984, 0.9942, -0.0060},
      {1.9984, 2.9922, 1.9907, 0.9907},
      {0.9942, 1.9907, 2.9757, 1.9823},
      {-0.0060, 0.9907, 1.9823, 1.9859}},
     {{0.3299, 0.3602, 0.2879, 0.2262},
      {0.3602, 0.4932, 0.4130, 0.3092},
      {0.2879, 0.4130, 0.5350, 0.4054},
      {0.2262, 0.3092, 0.4054, 0.3675}},
     0.5, 0.0},
    {2, 0.5, false,
     {-0.0067, -0.0079, 1.0094, 1.0122},
     {0.1029, 0.1255, 0.1553, 0.1390},
     {{2.0105, 2.0103, 1.0055, 0.0011},
      {2.0103, 3.0194, 2.0095, 1.0091},
      {1.0055, 2.0095, 2.9987, 2.0006},
      {0.0011, 1.0091, 2.0006, 2.0058}},
     {{0.3579, 0.3964, 0.3165, 0.2377},
      {0.3964, 0.5420, 0.4443, 0.3233},
      {0.3165, 0.4443, 0.5577, 0.4161},
      {0.2377, 0.3233, 0.4161, 0.3827}},
     0.5068, 0.0433},
    {3, 0.75, true,
     {0.0057, 0.0046, 1.0118, 1.0068},
     {0.1205, 0.1481, 0.1605, 0.1350},
     {{2.0015, 1.9969, 0.9923, -0.0065},
      {1.9969, 2.9906, 1.9887, 0.9898},
      {0.9923, 1.9897, 2.9778, 1.9864},
      {-0.0065, 0.9898, 1.9864, 1.9903}},
     {{0.3126, 0.3416, 0.2720, 0.2099},
      {0.3416, 0.4645, 0.3875, 0.2907},
      {0.2720, 0.3875, 0.4848, 0.3864},
      {0.2099, 0.2907, 0.3684, 0.3320}},
     0.75, 0.0},
    {4, 0.75, false,
     {0.0047, 0.0035, 1.0141, 1.0093},
     {0.1392, 0.1704, 0.1938, 0.1615},
     {{2.0183, 2.0258, 1.0263, 0.0121},
      {2.0258, 3.0351, 2.0272, 1.0088},
      {1.0263, 2.0272, 3.0120, 1.9961},
      {0.0121, 1.0088, 1.9961, 1.9892}},
     {{0.3793, 0.4260, 0.3453, 0.2620},
      {0.4260, 0.5807, 0.4842, 0.3448},
      {0.3453, 0.4842, 0.5897, 0.4256},
      {0.2620, 0.3448, 0.4256, 0.3726}},
     0.7575, 0.0446},
};

struct Replicate {
  std::optional<FitResult> fit;
  std::string error;
};

Replicate run_one(const StudyConfig& config, const ReferenceTable& ref, const MgsnParams& truth,
                  int r) {
  try {
    RngStream rng(config.seed, static_cast<std::uint64_t>(r));
    const DataMatrix data = sample_mgsn(rng, truth, config.n);
    if (ref.p_known) return {em_fit(data, ref.p, Constraint::None, std::nullopt, config.em, config.series), {}};
    ProfileOptions po;
    po.refine = config.refine;
    return {profile_fit(data, config.grid, config.em, config.series, po), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace

const ReferenceTable& reference_table(int id) {
  if (id < 1 || id > 4) throw InvalidParameter("table must be 1, 2, 3 or 4");
  return kTables[id - 1];
}

StudySummary run_study(const StudyConfig& config) {
  const ReferenceTable& ref = reference_table(config.table);
  if (config.replications < 1) throw InvalidParameter("replications must be >= 1");
  if (config.threads < 1) throw InvalidParameter("threads must be >= 1");
  if (config.n < 1) throw InvalidParameter("n must be >= 1");
  const MgsnParams truth = study_params(ref.p);

  std::vector<Replicate> results(config.replications);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < config.replications; r = next++) results[r] = run_one(config, ref, truth, r);
  };
  const int n_threads = std::min(config.threads, config.replications);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const int d = truth.dim();
  StudySummary s{config.table, 0, Vector::Zero(d), Vector::Zero(d), Matrix::Zero(d, d),
                 Matrix::Zero(d, d), 0.0, 0.0, {}, {}};
  for (int r = 0; r < config.replications; ++r) {
    if (!results[r].fit) {
      s.failures.push_back({r, results[r].error});
      continue;
    }
    const MgsnParams& est = results[r].fit->params;
    const Vector dmu = est.mu() - truth.mu();
    const Matrix dsig = est.sigma().matrix() - truth.sigma().matrix();
    s.mu_avg += est.mu();
    s.mu_mse += dmu.cwiseProduct(dmu);
    s.sigma_avg += est.sigma().matrix();
    s.sigma_mse += dsig.cwiseProduct(dsig);
    s.p_avg += est.p();
    s.p_mse += (est.p() - ref.p) * (est.p() - ref.p);
    s.p_hat.push_back(est.p());
    ++s.completed;
  }
  if (s.completed > 0) {
    const double inv = 1.0 / s.completed;
    s.mu_avg *= inv;
    s.mu_mse *= inv;
    s.sigma_avg *= inv;
    s.sigma_mse *= inv;
    s.p_avg *= inv;
    s.p_mse *= inv;
  }
  return s;
}

}  // namespace mgsn
