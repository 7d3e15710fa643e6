#include "htm/stats.hpp"

#include <algorithm>
#include <limits>

#include "htm/error.hpp"

namespace htm {

Interval wilson_interval(std::int64_t hits, std::int64_t n, double z) {
  require(n > 0 && hits >= 0 && hits <= n, ErrorCode::InvalidArgument,
          "Wilson interval needs 0 <= hits <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Guard the ordering against rounding at the edges.
  ci.lo = std::min(ci.lo, p);
  ci.hi = std::max(ci.hi, p);
  if (hits == 0) ci.lo = 0.0;
  if (hits == n) ci.hi = 1.0;
  return ci;
}

double z_score(double difference, double std_error) {
  if (std_error > 0.0) return difference / std_error;
  if (difference == 0.0) return 0.0;
  return difference > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
}

}  // namespace htm
