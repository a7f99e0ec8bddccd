#pragma once

// Repeated simulate-and-fit runs at the d = 4 study configuration, with the
// published averages kept alongside for comparison.

#include <cstdint>
#include <string>
#include <vector>

#include "mgsn/estimation.hpp"

namespace mgsn {

/// Published averages and parenthesized error figures for one table.
struct ReferenceTable {
  int id;
  double p;
  bool p_known;
  double mu_avg[4];
  double mu_mse[4];
  double sigma_avg[4][4];
  double sigma_mse[4][4];
  double p_avg;  // unknown-p tables only
  double p_mse;
};

/// Tables 1-4 in order: p = 0.5 known, 0.5 unknown, 0.75 known, 0.75 unknown.
const ReferenceTable& reference_table(int id);

struct StudyConfig {
  int table = 1;
  int n = 100;
  int replications = 100;
  std::uint64_t seed = 20240601;
  int threads = 1;
  EmControl em;
  SeriesControl series;
  std::vector<double> grid = default_p_grid();
  bool refine = true;
};

struct StudyFailure {
  int replication;
  std::string message;
};

struct StudySummary {
  int table;
  int completed;
  Vector mu_avg;
  Vector mu_mse;
  Matrix sigma_avg;
  Matrix sigma_mse;
  double p_avg;
  double p_mse;
  // Per-replication estimates in replication order (failed ones omitted).
  std::vector<double> p_hat;
  std::vector<StudyFailure> failures;
};

/// Replication r draws its data from RngStream(seed, r), so the summary
/// does not depend on the number of threads.
StudySummary run_study(const StudyConfig& config);

}  // namespace mgsn
