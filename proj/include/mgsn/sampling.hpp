#pragma once

// Seedable random streams and the three MGSN samplers: the direct
// geometric sum, the negative-binomial decomposition and the
// Poisson/logarithmic decomposition.

#include <cstdint>
#include <string_view>
#include <vector>

#include "mgsn/data.hpp"
#include "mgsn/distribution.hpp"

namespace mgsn {

/// xoshiro256** seeded through splitmix64 from (seed, stream_id). The same
/// pair reproduces the same sequence on every platform; only IEEE
/// arithmetic and libm log/sqrt/exp are involved in the derived variates.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64";
  static constexpr std::string_view kVersion = "1.0";

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma(shape, scale 1); shape > 0.
  double gamma(double shape);
  /// Poisson(mean); mean >= 0.
  std::int64_t poisson(double mean);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// N ~ GE(p) on {1, 2, ...} by inversion.
std::int64_t sample_geometric(RngStream& rng, double p);

/// Z with P(Z = k) = (1-p)^k / (-ln p * k), k >= 1, by sequential inversion.
/// The cumulative table is cached and extended on demand.
class LogarithmicSampler {
 public:
  explicit LogarithmicSampler(double p);
  std::int64_t operator()(RngStream& rng);
  double p() const { return p_; }

 private:
  double p_;
  double q_;
  double lambda_;
  std::vector<double> cdf_;
  double last_pmf_;
};

std::int64_t sample_logarithmic(RngStream& rng, double p);

/// T with MGF ((1-p)/(1-p e^t))^r as a Gamma(r, p/(1-p)) mixed Poisson, so
/// r need not be an integer.
std::int64_t sample_negbin_real(RngStream& rng, double r, double p);

/// One draw by the direct geometric-sum construction.
Vector sample_mgsn_one(RngStream& rng, const MgsnParams& params);
/// n independent draws as rows.
DataMatrix sample_mgsn(RngStream& rng, const MgsnParams& params, int n);

/// Sum of n_parts independent pieces, each a Gaussian sum of 1 + n_parts*T
/// N_d(mu/n_parts, Sigma/n_parts) terms with T ~ NB(1/n_parts, 1-p). Requires p < 1.
Vector sample_decomp1(RngStream& rng, const MgsnParams& params, int n_parts);

/// Y + sum_{i<=Q} Y_i with Q ~ Poisson(-ln p), Y_i | Z_i=k ~ N_d(k mu, k Sigma),
/// Z_i logarithmic, Y ~ N_d(mu, Sigma). Requires p < 1.
Vector sample_decomp2(RngStream& rng, const MgsnParams& params);

struct McEstimate {
  double estimate;
  double std_error;
};

/// P(X <= x coordinatewise) by Monte Carlo on stream (seed, 0).
McEstimate mgsn_cdf_mc(const Vector& x, const MgsnParams& params, std::uint64_t seed,
                       int n_samples);

}  // namespace mgsn
