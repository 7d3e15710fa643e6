#pragma once

#include <cmath>
#include <cstdint>

namespace htm {

/// Welford accumulator for mean and variance.
class RunningStats {
 public:
  void push(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (v - mean_);
  }

  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% two-sided normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for `hits` successes out of `n` trials.
Interval wilson_interval(std::int64_t hits, std::int64_t n, double z = kZ95);

/// difference / standard error, with 0/0 read as exact agreement.
double z_score(double difference, double std_error);

}  // namespace htm
