#include "htm/distributions.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "htm/error.hpp"
#include "htm/quadrature.hpp"

namespace htm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(double v) { return std::isfinite(v); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Tail of H (unshifted family law).
double tail_h(const TailModel::Family& f, double z) {
  return std::visit(
      Overloaded{
          [z](const law::Pareto& p) {
            return z < p.xm ? 1.0 : std::pow(p.xm / z, p.alpha);
          },
          [z](const law::Lognormal& l) {
            if (z <= 0.0) return 1.0;
            return 0.5 * std::erfc((std::log(z) - l.mu) / (l.sigma * std::sqrt(2.0)));
          },
          [z](const law::Weibull& w) {
            if (z <= 0.0) return 1.0;
            return std::exp(-std::pow(z / w.scale, w.shape));
          },
          [z](const law::Exponential& e) { return z < 0.0 ? 1.0 : std::exp(-e.rate * z); },
          [z](const law::TwoPoint& t) {
            double s = 0.0;
            if (t.up > z) s += t.p;
            if (t.down > z) s += 1.0 - t.p;
            return s;
          },
          [z](const law::Degenerate& d) { return d.value > z ? 1.0 : 0.0; },
      },
      f);
}

double mean_h(const TailModel::Family& f) {
  return std::visit(
      Overloaded{
          [](const law::Pareto& p) { return p.alpha * p.xm / (p.alpha - 1.0); },
          [](const law::Lognormal& l) { return std::exp(l.mu + 0.5 * l.sigma * l.sigma); },
          [](const law::Weibull& w) { return w.scale * std::tgamma(1.0 + 1.0 / w.shape); },
          [](const law::Exponential& e) { return 1.0 / e.rate; },
          [](const law::TwoPoint& t) { return t.p * t.up + (1.0 - t.p) * t.down; },
          [](const law::Degenerate& d) { return d.value; },
      },
      f);
}

double second_moment_h(const TailModel::Family& f) {
  return std::visit(
      Overloaded{
          [](const law::Pareto& p) {
            return p.alpha > 2.0 ? p.alpha * p.xm * p.xm / (p.alpha - 2.0) : kInf;
          },
          [](const law::Lognormal& l) {
            return std::exp(2.0 * l.mu + 2.0 * l.sigma * l.sigma);
          },
          [](const law::Weibull& w) {
            return w.scale * w.scale * std::tgamma(1.0 + 2.0 / w.shape);
          },
          [](const law::Exponential& e) { return 2.0 / (e.rate * e.rate); },
          [](const law::TwoPoint& t) {
            return t.p * t.up * t.up + (1.0 - t.p) * t.down * t.down;
          },
          [](const law::Degenerate& d) { return d.value * d.value; },
      },
      f);
}

}  // namespace

TailModel::TailModel(Family f, double shift) : family_(f), shift_(shift) {
  require(finite(shift), ErrorCode::InvalidModel, "shift must be finite");
  a_plus_ = integrated_tail(0.0);
  if (const auto* p = std::get_if<law::Pareto>(&family_)) exponent_ = -1.0 / p->alpha;
  if (const auto* w = std::get_if<law::Weibull>(&family_)) exponent_ = 1.0 / w->shape;
  if (const auto* e = std::get_if<law::Exponential>(&family_)) exponent_ = -1.0 / e->rate;
}

TailModel TailModel::pareto(double alpha, double xm, double shift) {
  require(alpha > 1.0 && finite(alpha), ErrorCode::InvalidModel,
          "Pareto needs alpha > 1 for a finite mean, got " + num(alpha));
  require(xm > 0.0 && finite(xm), ErrorCode::InvalidModel, "Pareto needs xm > 0");
  return TailModel(law::Pareto{alpha, xm}, shift);
}

TailModel TailModel::lognormal(double mu, double sigma, double shift) {
  require(finite(mu), ErrorCode::InvalidModel, "Lognormal mu must be finite");
  require(sigma > 0.0 && finite(sigma), ErrorCode::InvalidModel, "Lognormal needs sigma > 0");
  return TailModel(law::Lognormal{mu, sigma}, shift);
}

TailModel TailModel::weibull(double shape, double scale, double shift) {
  require(shape > 0.0 && shape < 1.0, ErrorCode::InvalidModel,
          "Weibull shape must lie in (0, 1), got " + num(shape));
  require(scale > 0.0 && finite(scale), ErrorCode::InvalidModel, "Weibull needs scale > 0");
  return TailModel(law::Weibull{shape, scale}, shift);
}

TailModel TailModel::exponential(double rate, double shift) {
  require(rate > 0.0 && finite(rate), ErrorCode::InvalidModel, "Exponential needs rate > 0");
  return TailModel(law::Exponential{rate}, shift);
}

TailModel TailModel::two_point(double p, double up, double down, double shift) {
  require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidModel, "TwoPoint needs p in [0, 1]");
  require(finite(up) && finite(down), ErrorCode::InvalidModel, "TwoPoint values must be finite");
  return TailModel(law::TwoPoint{p, up, down}, shift);
}

TailModel TailModel::degenerate(double value) {
  require(finite(value), ErrorCode::InvalidModel, "Degenerate value must be finite");
  return TailModel(law::Degenerate{value}, 0.0);
}

std::string TailModel::family_name() const {
  return std::visit(Overloaded{
                        [](const law::Pareto&) { return std::string("pareto"); },
                        [](const law::Lognormal&) { return std::string("lognormal"); },
                        [](const law::Weibull&) { return std::string("weibull"); },
                        [](const law::Exponential&) { return std::string("exponential"); },
                        [](const law::TwoPoint&) { return std::string("two_point"); },
                        [](const law::Degenerate&) { return std::string("degenerate"); },
                    },
                    family_);
}

double TailModel::tail_bar(double x) const { return tail_h(family_, x + shift_); }

double TailModel::mean() const { return mean_h(family_) - shift_; }

double TailModel::second_moment() const {
  const double m2 = second_moment_h(family_);
  if (!finite(m2)) return kInf;
  const double m1 = mean_h(family_);
  return m2 - 2.0 * shift_ * m1 + shift_ * shift_;
}

double TailModel::variance() const {
  const double m2 = second_moment_h(family_);
  if (!finite(m2)) return kInf;
  const double m1 = mean_h(family_);
  return std::max(0.0, m2 - m1 * m1);
}

double TailModel::support_min() const {
  const double lo = std::visit(
      Overloaded{
          [](const law::Pareto& p) { return p.xm; },
          [](const law::Lognormal&) { return 0.0; },
          [](const law::Weibull&) { return 0.0; },
          [](const law::Exponential&) { return 0.0; },
          [](const law::TwoPoint& t) {
            if (t.p >= 1.0) return t.up;
            if (t.p <= 0.0) return t.down;
            return std::min(t.up, t.down);
          },
          [](const law::Degenerate& d) { return d.value; },
      },
      family_);
  return lo - shift_;
}

double TailModel::support_max() const {
  const double hi = std::visit(
      Overloaded{
          [](const law::TwoPoint& t) {
            if (t.p >= 1.0) return t.up;
            if (t.p <= 0.0) return t.down;
            return std::max(t.up, t.down);
          },
          [](const law::Degenerate& d) { return d.value; },
          [](const auto&) { return kInf; },
      },
      family_);
  return hi - shift_;
}

bool TailModel::heavy_tailed() const {
  return std::holds_alternative<law::Pareto>(family_) ||
         std::holds_alternative<law::Lognormal>(family_) ||
         std::holds_alternative<law::Weibull>(family_);
}

double TailModel::quadrature_scale() const { return std::max(mean_h(family_), 1e-300); }

double TailModel::integrated_tail_h(double z) const {
  return std::visit(
      Overloaded{
          [z](const law::Pareto& p) {
            if (z < p.xm) return (p.xm - z) + p.xm / (p.alpha - 1.0);
            return p.xm * std::pow(p.xm / z, p.alpha - 1.0) / (p.alpha - 1.0);
          },
          [z](const law::Exponential& e) {
            if (z < 0.0) return -z + 1.0 / e.rate;
            return std::exp(-e.rate * z) / e.rate;
          },
          [z](const law::TwoPoint& t) {
            return t.p * std::max(t.up - z, 0.0) + (1.0 - t.p) * std::max(t.down - z, 0.0);
          },
          [z](const law::Degenerate& d) { return std::max(d.value - z, 0.0); },
          [this, z](const auto& heavy) {
            // Lognormal / Weibull: support [0, inf) with known mean.
            const double mean = mean_h(family_);
            if (z <= 0.0) return -z + mean;
            const double tz = tail_h(family_, z);
            if (tz < DBL_MIN) return 0.0;
            const double scale = quadrature_scale();
            quad::Tolerance tol;
            tol.absolute = 1e-12 * scale * std::min(1.0, tz);
            tol.relative = 1e-11;
            const double cutoff = 1e-15 * std::min(scale, tz);
            const double width = std::max(0.25 * z, 0.25 * scale);
            (void)heavy;
            return quad::simpson_to_infinity([this](double y) { return tail_h(family_, y); },
                                             z, width, cutoff, tol);
          },
      },
      family_);
}

double TailModel::integrated_tail(double x) const { return integrated_tail_h(x + shift_); }

double TailModel::sample(RngStream& rng) const {
  return std::visit(
      Overloaded{
          [&](const law::Pareto& p) {
            return p.xm * std::exp(std::log(1.0 - rng.uniform()) * exponent_) - shift_;
          },
          [&](const law::Lognormal& l) {
            return std::exp(l.mu + l.sigma * rng.normal()) - shift_;
          },
          [&](const law::Weibull& w) {
            return w.scale * std::pow(-std::log(1.0 - rng.uniform()), exponent_) - shift_;
          },
          [&](const law::Exponential&) {
            return std::log(1.0 - rng.uniform()) * exponent_ - shift_;
          },
          [&](const law::TwoPoint& t) {
            return (rng.uniform() < t.p ? t.up : t.down) - shift_;
          },
          [&](const law::Degenerate& d) { return d.value; },
      },
      family_);
}

double TailModel::sample_from_uniform(double u) const {
  require(u > 0.0 && u < 1.0, ErrorCode::InvalidArgument, "uniform level must lie in (0, 1)");
  return std::visit(
      Overloaded{
          [&](const law::Pareto& p) {
            return p.xm * std::pow(1.0 - u, -1.0 / p.alpha) - shift_;
          },
          [&](const law::Lognormal& l) {
            const double z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
            return std::exp(l.mu + l.sigma * z) - shift_;
          },
          [&](const law::Weibull& w) {
            return w.scale * std::pow(-std::log1p(-u), 1.0 / w.shape) - shift_;
          },
          [&](const law::Exponential& e) { return -std::log1p(-u) / e.rate - shift_; },
          [&](const law::TwoPoint& t) { return (u < t.p ? t.up : t.down) - shift_; },
          [&](const law::Degenerate& d) { return d.value; },
      },
      family_);
}

// ---------------------------------------------------------------------------

SpacingModel SpacingModel::exponential(double rate) {
  require(rate > 0.0 && finite(rate), ErrorCode::InvalidModel, "spacing rate must be positive");
  return SpacingModel(spacing::Exponential{rate});
}

SpacingModel SpacingModel::deterministic(double period) {
  require(period > 0.0 && finite(period), ErrorCode::InvalidModel,
          "spacing period must be positive");
  return SpacingModel(spacing::Deterministic{period});
}

SpacingModel SpacingModel::uniform(double lo, double hi) {
  require(lo > 0.0 && hi > lo && finite(hi), ErrorCode::InvalidModel,
          "uniform spacing needs 0 < lo < hi");
  return SpacingModel(spacing::Uniform{lo, hi});
}

std::string SpacingModel::family_name() const {
  return std::visit(Overloaded{
                        [](const spacing::Exponential&) { return std::string("exponential"); },
                        [](const spacing::Deterministic&) { return std::string("deterministic"); },
                        [](const spacing::Uniform&) { return std::string("uniform"); },
                    },
                    family_);
}

double SpacingModel::mean() const {
  return std::visit(Overloaded{
                        [](const spacing::Exponential& e) { return 1.0 / e.rate; },
                        [](const spacing::Deterministic& d) { return d.period; },
                        [](const spacing::Uniform& u) { return 0.5 * (u.lo + u.hi); },
                    },
                    family_);
}

double SpacingModel::tail_bar(double t) const {
  return std::visit(Overloaded{
                        [t](const spacing::Exponential& e) {
                          return t < 0.0 ? 1.0 : std::exp(-e.rate * t);
                        },
                        [t](const spacing::Deterministic& d) { return d.period > t ? 1.0 : 0.0; },
                        [t](const spacing::Uniform& u) {
                          if (t < u.lo) return 1.0;
                          if (t >= u.hi) return 0.0;
                          return (u.hi - t) / (u.hi - u.lo);
                        },
                    },
                    family_);
}

double SpacingModel::sample(RngStream& rng) const {
  return std::visit(Overloaded{
                        [&](const spacing::Exponential& e) {
                          return -std::log1p(-rng.uniform()) / e.rate;
                        },
                        [](const spacing::Deterministic& d) { return d.period; },
                        [&](const spacing::Uniform& u) {
                          return u.lo + (u.hi - u.lo) * rng.uniform();
                        },
                    },
                    family_);
}

double SpacingModel::sample_from_uniform(double u) const {
  require(u > 0.0 && u < 1.0, ErrorCode::InvalidArgument, "uniform level must lie in (0, 1)");
  return std::visit(Overloaded{
                        [u](const spacing::Exponential& e) { return -std::log1p(-u) / e.rate; },
                        [](const spacing::Deterministic& d) { return d.period; },
                        [u](const spacing::Uniform& s) { return s.lo + (s.hi - s.lo) * u; },
                    },
                    family_);
}

// ---------------------------------------------------------------------------

double sstar_ratio(const TailModel& model, double x) {
  require(model.a_plus() > 0.0, ErrorCode::InvalidModel,
          "S* ratio needs a positive a+ (law has no positive mass)");
  const double fx = model.tail_bar(x);
  if (!(fx >= DBL_MIN)) {
    fail(ErrorCode::TailUnderflow, "tail underflows at x = " + num(x));
  }
  if (x <= 0.0) return 0.0;
  quad::Tolerance tol;
  tol.absolute = 0.0;
  tol.relative = 1e-10;
  // The integrand is symmetric about x/2.
  const double half = quad::simpson_geometric(
      [&](double y) { return model.tail_bar(x - y) * model.tail_bar(y); }, 0.0, 0.5 * x, tol);
  return 2.0 * half / (2.0 * model.a_plus() * fx);
}

double long_tail_ratio(const TailModel& model, double x) {
  const double fx = model.tail_bar(x);
  if (!(fx >= DBL_MIN)) fail(ErrorCode::TailUnderflow, "tail underflows at x = " + num(x));
  return model.tail_bar(x + 1.0) / fx;
}

}  // namespace htm
