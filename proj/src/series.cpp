#include "mgsn/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mgsn/errors.hpp"
#include "mgsn/linalg.hpp"

namespace mgsn {

namespace {

constexpr int kLogTableSize = 4096;

const std::array<double, kLogTableSize>& log_table() {
  static const std::array<double, kLogTableSize> table = [] {
    std::array<double, kLogTableSize> t{};
    t[0] = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < kLogTableSize; ++k) t[k] = std::log(static_cast<double>(k));
    return t;
  }();
  return table;
}

inline double log_int(int k) {
  return k < kLogTableSize ? log_table()[k] : std::log(static_cast<double>(k));
}

}  // namespace

void SeriesControl::validate() const {
  if (k_max < 1) throw InvalidParameter("k_max must be >= 1");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidParameter("rel_tol must lie in (0, 1)");
}

SeriesValue evaluate_series(const SeriesShape& shape, const SeriesPoint& pt,
                            const SeriesControl& ctl, bool with_moments) {
  const double half_d = 0.5 * shape.dim;
  const double log_norm = -half_d * kLn2Pi - 0.5 * shape.logdet;

  if (shape.p >= 1.0) {
    const double q = std::max(0.0, pt.xx - 2.0 * pt.xm + pt.mm);
    const double v = log_norm - 0.5 * q;
    if (!std::isfinite(v)) throw SeriesUnderflow("density term is not finite");
    return {v, 1.0, 1.0, 1};
  }

  const double log_p = std::log(shape.p);
  const double log_q = std::log1p(-shape.p);
  const int cap = ctl.term_cap();
  const double log_tol = std::log(ctl.rel_tol);

  LogSumExp den, num_n, num_inv;
  int k = 1;
  for (;; ++k) {
    const double kd = static_cast<double>(k);
    const double quad = std::max(0.0, pt.xx / kd - 2.0 * pt.xm + kd * pt.mm);
    const double lk = log_int(k);
    const double t = log_p + (kd - 1.0) * log_q + log_norm - half_d * lk - 0.5 * quad;
    den.add(t);
    if (with_moments) {
      num_n.add(t + lk);
      num_inv.add(t - lk);
    }
    if (k >= cap) break;
    if (ctl.paper_mode) continue;

    // Remaining mass sum_{j>k} p(1-p)^{j-1} phi_j <= (1-p)^k sup phi_{k+1};
    // the first-moment version carries E(N; N > k) = (1-p)^k (k + 1/p).
    const double sum = den.value();
    if (!std::isfinite(sum)) continue;
    double tail = kd * log_q + log_norm - half_d * log_int(k + 1);
    if (with_moments) tail += std::log(kd + 1.0 / shape.p);
    const double ref = with_moments ? num_inv.value() : sum;
    if (tail < ref + log_tol) break;
  }

  SeriesValue out;
  out.terms = k;
  out.log_density = den.value();
  if (!std::isfinite(out.log_density)) {
    throw SeriesUnderflow("all " + std::to_string(k) + " series terms underflow");
  }
  if (with_moments) {
    out.mean_n = std::max(1.0, std::exp(num_n.value() - out.log_density));
    out.mean_inv_n = std::clamp(std::exp(num_inv.value() - out.log_density), 0.0, 1.0);
  }
  return out;
}

}  // namespace mgsn
