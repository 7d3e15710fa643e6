#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "htm/rng.hpp"

namespace htm {

namespace law {
struct Pareto {
  double alpha;
  double xm;
};
struct Lognormal {
  double mu;
  double sigma;
};
struct Weibull {
  double shape;
  double scale;
};
struct Exponential {
  double rate;
};
struct TwoPoint {
  double p;
  double up;
  double down;
};
struct Degenerate {
  double value;
};
}  // namespace law

/// Jump-size law Y = H - shift, where H follows one of the named families.
///
/// Tails, integrated tails and moments are exact closed forms except the
/// integrated tail of Lognormal and Weibull laws, which is computed by
/// adaptive quadrature.
class TailModel {
 public:
  using Family = std::variant<law::Pareto, law::Lognormal, law::Weibull,
                              law::Exponential, law::TwoPoint, law::Degenerate>;

  static TailModel pareto(double alpha, double xm, double shift = 0.0);
  static TailModel lognormal(double mu, double sigma, double shift = 0.0);
  static TailModel weibull(double shape, double scale, double shift = 0.0);
  static TailModel exponential(double rate, double shift = 0.0);
  static TailModel two_point(double p, double up, double down, double shift = 0.0);
  static TailModel degenerate(double value);

  const Family& family() const { return family_; }
  double shift() const { return shift_; }
  std::string family_name() const;

  /// P{Y > x}.
  double tail_bar(double x) const;
  /// F_I(x), the integral of tail_bar over [x, inf).
  double integrated_tail(double x) const;
  /// a+ = F_I(0).
  double a_plus() const { return a_plus_; }
  double mean() const;
  /// E Y^2; +inf when the second moment diverges.
  double second_moment() const;
  double variance() const;

  /// Smallest point of the support of Y.
  double support_min() const;
  /// Largest point of the support of Y (+inf for unbounded laws).
  double support_max() const;
  /// Pareto, Lognormal and Weibull laws; the only families with a heavy right tail.
  bool heavy_tailed() const;

  /// One variate; deterministic given the stream position.
  double sample(RngStream& rng) const;
  /// Quantile of Y at level u in (0, 1). `sample` uses the same inverse
  /// transform for every family except Lognormal, which draws a normal.
  double sample_from_uniform(double u) const;

 private:
  TailModel(Family f, double shift);
  double integrated_tail_h(double z) const;  // F_I of H at z
  double quadrature_scale() const;

  Family family_;
  double shift_ = 0.0;
  double a_plus_ = 0.0;
  double exponent_ = 0.0;  // -1/alpha (Pareto), 1/shape (Weibull), -1/rate (Exponential)
};

namespace spacing {
struct Exponential {
  double rate;
};
struct Deterministic {
  double period;
};
struct Uniform {
  double lo;
  double hi;
};
}  // namespace spacing

/// Law of the inter-jump times T_n - T_{n-1}.
class SpacingModel {
 public:
  using Family = std::variant<spacing::Exponential, spacing::Deterministic, spacing::Uniform>;

  static SpacingModel exponential(double rate);
  static SpacingModel deterministic(double period);
  static SpacingModel uniform(double lo, double hi);

  const Family& family() const { return family_; }
  std::string family_name() const;

  double mean() const;
  /// P{T > t}.
  double tail_bar(double t) const;
  double sample(RngStream& rng) const;
  double sample_from_uniform(double u) const;
  bool is_exponential() const { return std::holds_alternative<spacing::Exponential>(family_); }
  bool is_deterministic() const {
    return std::holds_alternative<spacing::Deterministic>(family_);
  }

 private:
  explicit SpacingModel(Family f) : family_(f) {}
  Family family_;
};

// Operation-style free functions.
inline double tail_bar(const TailModel& m, double x) { return m.tail_bar(x); }
inline double integrated_tail(const TailModel& m, double x) { return m.integrated_tail(x); }
inline double sample(const TailModel& m, RngStream& rng) { return m.sample(rng); }
inline double sample(const SpacingModel& m, RngStream& rng) { return m.sample(rng); }

/// [int_0^x F(x-y) F(y) dy] / [2 a+ F(x)] with F the tail of `model`.
/// Throws TailUnderflow when F(x) is zero or subnormal.
double sstar_ratio(const TailModel& model, double x);

/// F(x+1)/F(x), the long-tailedness indicator. Tends to 1 for long-tailed laws.
double long_tail_ratio(const TailModel& model, double x);

// ---------------------------------------------------------------------------
// Kesten-type bound on a grid.

/// A tail function sampled at 0, h, 2h, ... on a uniform grid.
struct GridTail {
  double step = 0.0;
  std::vector<double> values;
};

struct KestenReport {
  double delta = 0.0;
  double floor = 1e-10;
  /// per_n[k] is sup_x G^{*(k+1)}(x) / [(1+delta)^(k+1) G(x)] over retained points.
  std::vector<double> per_n;
  /// sup_x G^{*n}(x) / G(x), without the geometric factor.
  std::vector<double> per_n_raw;
  /// |1 - total mass| of the n-fold law, per n.
  std::vector<double> mass_defect;
  double c_hat = 0.0;
  std::size_t retained_points = 0;
};

struct KestenOptions {
  double floor = 1e-10;
  double max_mass_defect = 1e-6;
};

/// Iterated grid convolution of the lattice law Z = h*ceil(Y/h), whose tail
/// equals `gtail` at every grid point. Throws GridTooCoarse when an n-fold
/// mass defect exceeds the limit.
KestenReport kesten_check(const GridTail& gtail, double delta, int n_max,
                          const KestenOptions& options = {});

/// Samples `tail` on the grid 0, h, ... up to the first point where it drops
/// below `cutoff` (inclusive).
GridTail discretize_tail(const std::function<double(double)>& tail, double step,
                         double cutoff = 1e-10, std::size_t max_points = 1u << 24);

}  // namespace htm
