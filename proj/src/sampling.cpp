#include "mgsn/sampling.hpp"

#include <cmath>
#include <string>

#include "mgsn/errors.hpp"

namespace mgsn {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

void require_open_p(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter(std::string(who) + " requires 0 < p < 1");
}

Vector gaussian_draw(RngStream& rng, const MgsnParams& params, double scale) {
  const int d = params.dim();
  Vector z(d);
  for (int i = 0; i < d; ++i) z(i) = rng.normal();
  return scale * params.mu() + std::sqrt(scale) * (params.chol().lower() * z);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t mix = stream_id ^ 0xD1B54A32D192ED03ULL;
  std::uint64_t state = seed ^ splitmix64(mix);
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_ = true;
  return u * f;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidParameter("gamma shape must be > 0");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::int64_t RngStream::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidParameter("Poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }
  // PTRS transformed rejection, Hormann (1993).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + kf * loglam - std::lgamma(kf + 1.0)) {
      return static_cast<std::int64_t>(kf);
    }
  }
}

std::int64_t sample_geometric(RngStream& rng, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("geometric p must lie in (0, 1]");
  if (p == 1.0) return 1;
  return static_cast<std::int64_t>(std::floor(std::log(rng.uniform()) / std::log1p(-p))) + 1;
}

LogarithmicSampler::LogarithmicSampler(double p)
    : p_(p), q_(1.0 - p), lambda_(-std::log(p)) {
  require_open_p(p, "logarithmic sampler");
  last_pmf_ = q_ / lambda_;
  cdf_.push_back(last_pmf_);
}

std::int64_t LogarithmicSampler::operator()(RngStream& rng) {
  const double u = rng.uniform();
  std::size_t k = 0;
  for (;;) {
    if (k == cdf_.size()) {
      const double next = static_cast<double>(k + 1);
      last_pmf_ *= q_ * static_cast<double>(k) / next;
      const double c = cdf_.back() + last_pmf_;
      // Cumulative sums stall once the pmf falls below rounding; the
      // remaining mass is then below 2^-52 and the last index absorbs it.
      if (c == cdf_.back()) return static_cast<std::int64_t>(k);
      cdf_.push_back(c);
    }
    if (u <= cdf_[k]) return static_cast<std::int64_t>(k + 1);
    ++k;
  }
}

std::int64_t sample_logarithmic(RngStream& rng, double p) {
  LogarithmicSampler sampler(p);
  return sampler(rng);
}

std::int64_t sample_negbin_real(RngStream& rng, double r, double p) {
  if (!(r > 0.0)) throw InvalidParameter("negative binomial r must be > 0");
  require_open_p(p, "negative binomial");
  const double rate = rng.gamma(r) * (p / (1.0 - p));
  return rng.poisson(rate);
}

Vector sample_mgsn_one(RngStream& rng, const MgsnParams& params) {
  const auto n = sample_geometric(rng, params.p());
  return gaussian_draw(rng, params, static_cast<double>(n));
}

DataMatrix sample_mgsn(RngStream& rng, const MgsnParams& params, int n) {
  if (n < 1) throw InvalidParameter("sample size must be >= 1");
  Matrix out(n, params.dim());
  for (int i = 0; i < n; ++i) out.row(i) = sample_mgsn_one(rng, params).transpose();
  return DataMatrix(std::move(out));
}

Vector sample_decomp1(RngStream& rng, const MgsnParams& params, int n_parts) {
  require_open_p(params.p(), "decomposition sampler");
  if (n_parts < 1) throw InvalidParameter("n_parts must be >= 1");
  const double r = 1.0 / n_parts;
  Vector total = Vector::Zero(params.dim());
  for (int k = 0; k < n_parts; ++k) {
    // T carries 1-p in the e^t slot so that each part has MGF M_X(t)^r.
    const auto t = sample_negbin_real(rng, r, 1.0 - params.p());
    const double terms = 1.0 + static_cast<double>(n_parts) * static_cast<double>(t);
    // Sum of `terms` i.i.d. N(r mu, r Sigma) vectors.
    total += gaussian_draw(rng, params, terms * r);
  }
  return total;
}

Vector sample_decomp2(RngStream& rng, const MgsnParams& params) {
  require_open_p(params.p(), "decomposition sampler");
  LogarithmicSampler log_sampler(params.p());
  Vector total = gaussian_draw(rng, params, 1.0);
  const auto q = rng.poisson(-std::log(params.p()));
  for (std::int64_t i = 0; i < q; ++i) {
    const auto z = log_sampler(rng);
    total += gaussian_draw(rng, params, static_cast<double>(z));
  }
  return total;
}

McEstimate mgsn_cdf_mc(const Vector& x, const MgsnParams& params, std::uint64_t seed,
                       int n_samples) {
  if (n_samples < 1000) throw InvalidParameter("n_samples must be >= 1000");
  if (x.size() != params.dim()) throw DimensionMismatch("x does not match the distribution dim");
  RngStream rng(seed, 0);
  long hits = 0;
  for (int i = 0; i < n_samples; ++i) {
    const Vector draw = sample_mgsn_one(rng, params);
    if ((draw.array() <= x.array()).all()) ++hits;
  }
  const double est = static_cast<double>(hits) / n_samples;
  return {est, std::sqrt(est * (1.0 - est) / n_samples)};
}

}  // namespace mgsn
