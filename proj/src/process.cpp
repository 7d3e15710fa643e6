#include "htm/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "htm/error.hpp"

namespace htm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maximum of a Brownian bridge from a to b over a time span with variance
// rate sigma^2, at uniform level u.
double bridge_max(double a, double b, double sigma, double span, double u) {
  if (span <= 0.0 || sigma <= 0.0) return std::max(a, b);
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * sigma * sigma * span * std::log(u)));
}

// Inverse Gaussian variate with mean mu and shape lambda from a standard
// normal z and a uniform u (Michael, Schucany and Haas).
double inverse_gaussian(double mu, double lambda, double z, double u) {
  const double y = z * z;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  return u <= mu / (mu + x) ? x : mu * mu / x;
}

bool avoids_unit_interval(const TailModel& jump) {
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, law::TwoPoint>) {
          const double up = f.up - jump.shift();
          const double down = f.down - jump.shift();
          const bool up_ok = f.p <= 0.0 || std::fabs(up) >= 1.0;
          const bool down_ok = f.p >= 1.0 || std::fabs(down) >= 1.0;
          return up_ok && down_ok;
        } else if constexpr (std::is_same_v<T, law::Degenerate>) {
          return std::fabs(f.value) >= 1.0;
        } else {
          return jump.support_min() >= 1.0;
        }
      },
      jump.family());
}

}  // namespace

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::RandomWalk: return "random_walk";
    case ProcessKind::CompoundRenewal: return "compound_renewal";
    case ProcessKind::CompoundPoisson: return "compound_poisson";
    case ProcessKind::Levy: return "levy";
  }
  return "unknown";
}

std::vector<double> drift_admissibility_ratios(double c, const SpacingModel& spacing,
                                               const TailModel& jump) {
  std::vector<double> ratios;
  for (int k = 2; k <= 6; ++k) {
    const double x = std::pow(10.0, k);
    const double num = spacing.tail_bar(x / c);
    const double den = jump.tail_bar(x);
    ratios.push_back(num == 0.0 ? 0.0 : (den == 0.0 ? kInf : num / den));
  }
  return ratios;
}

ProcessSpec ProcessSpec::random_walk(TailModel jump, ProcessOptions opt) {
  ProcessSpec s(ProcessKind::RandomWalk, 0.0, 0.0, SpacingModel::deterministic(1.0), jump);
  s.validate(opt);
  return s;
}

ProcessSpec ProcessSpec::compound_renewal(double c, SpacingModel spacing, TailModel jump,
                                          ProcessOptions opt) {
  ProcessSpec s(ProcessKind::CompoundRenewal, c, 0.0, spacing, jump);
  s.validate(opt);
  return s;
}

ProcessSpec ProcessSpec::compound_poisson(double c, double rate, TailModel jump,
                                          ProcessOptions opt) {
  ProcessSpec s(ProcessKind::CompoundPoisson, c, 0.0, SpacingModel::exponential(rate), jump);
  s.validate(opt);
  return s;
}

ProcessSpec ProcessSpec::levy(double drift, double sigma, double big_jump_rate,
                              TailModel big_jump, ProcessOptions opt) {
  ProcessSpec s(ProcessKind::Levy, drift, sigma, SpacingModel::exponential(big_jump_rate),
                big_jump);
  s.validate(opt);
  return s;
}

void ProcessSpec::validate(const ProcessOptions& opt) const {
  require(std::isfinite(drift_), ErrorCode::InvalidModel, "linear drift must be finite");
  require(std::isfinite(sigma_) && sigma_ >= 0.0, ErrorCode::InvalidModel,
          "sigma must be non-negative");
  if (opt.require_negative_drift) {
    const double a_val = a();
    require(a_val > 0.0, ErrorCode::InvalidModel,
            "drift must be negative: E(c T_1 + Y_1) = " + std::to_string(-a_val));
  }
  if (kind_ == ProcessKind::CompoundRenewal && drift_ > 0.0 && !spacing_.is_exponential() &&
      !spacing_.is_deterministic()) {
    const auto r = drift_admissibility_ratios(drift_, spacing_, jump_);
    bool ok = r.back() <= 1e-3;
    for (std::size_t i = 1; i < r.size(); ++i) ok = ok && r[i] <= r[i - 1];
    require(ok, ErrorCode::InvalidModel,
            "P{c T_1 > x} is not o(P{Y_1 > x}) on x = 1e2..1e6; positive drift inadmissible");
  }
  if (kind_ == ProcessKind::Levy) {
    require(avoids_unit_interval(jump_), ErrorCode::InvalidModel,
            "Levy big jumps must have magnitude >= 1 (support outside (-1, 1))");
  }
}

double ProcessSpec::a() const { return -(drift_ * spacing_.mean() + jump_.mean()); }

double ProcessSpec::variance_x1() const {
  return sigma_ * sigma_ + jump_rate() * jump_.second_moment();
}

std::string ProcessSpec::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << to_string(kind_) << "(c=" << drift_ << ", sigma=" << sigma_ << ", spacing="
     << spacing_.family_name() << "[mean " << spacing_.mean() << "], jump="
     << jump_.family_name() << "[mean " << jump_.mean() << "], a=" << a() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

double Segment::value_at(double t) const {
  if (t <= t_start) return x_start;
  if (t >= t_end) return x_pre;
  const double span = t_end - t_start;
  const double lead = t - t_start;
  if (!brownian()) return x_start + drift * lead;
  const double mean = x_start + (x_pre - x_start) * lead / span;
  const double sd = sigma * std::sqrt(lead * (t_end - t) / span);
  return mean + sd * noise.z_point;
}

double Segment::max_until(double t, double x_t) const {
  if (!brownian()) return std::max(x_start, x_t);
  return bridge_max(x_start, x_t, sigma, t - t_start, noise.u_point_max);
}

std::optional<double> Segment::first_passage_below(double level) const {
  if (x_start <= level) return t_start;
  const double span = t_end - t_start;
  if (!brownian()) {
    if (drift < 0.0 && x_pre <= level) {
      const double t = t_start + (x_start - level) / (-drift);
      if (t < t_end) return t;
    }
    return std::nullopt;
  }
  // Brownian bridge from x_start to x_pre: the crossing is a first passage of
  // a Brownian motion with drift (x_pre - level)/span to -(x_start - level)
  // in the time u = span * t / (span - t).
  const double d = x_start - level;
  const double b = x_pre - level;
  if (b > 0.0) {
    const double p_cross = std::exp(-2.0 * d * b / (sigma * sigma * span));
    if (noise.u_cross >= p_cross) return std::nullopt;
  }
  const double nu = b / span;
  double u;
  if (nu == 0.0) {
    u = d * d / (sigma * sigma * noise.z_hit * noise.z_hit);
  } else {
    u = inverse_gaussian(d / std::fabs(nu), d * d / (sigma * sigma), noise.z_hit, noise.u_hit);
  }
  const double t = t_start + u * span / (span + u);
  return std::min(t, std::nextafter(t_end, t_start));
}

// ---------------------------------------------------------------------------

ProcessSimulator::ProcessSimulator(const ProcessSpec& spec, RngStream& rng, SimState start)
    : spec_(spec), rng_(rng), state_(start) {}

const Segment& ProcessSimulator::open_segment() {
  if (open_) return seg_;
  const double dt = spec_.spacing().sample(rng_);
  seg_.index = state_.n + 1;
  seg_.t_start = state_.t;
  seg_.x_start = state_.x;
  seg_.t_end = state_.t + dt;
  seg_.drift = spec_.linear_drift();
  seg_.sigma = spec_.sigma();
  const double base = state_.x + seg_.drift * dt;
  if (seg_.sigma > 0.0) {
    seg_.x_pre = base + seg_.sigma * std::sqrt(dt) * rng_.normal();
    seg_.seg_max = bridge_max(seg_.x_start, seg_.x_pre, seg_.sigma, dt, rng_.uniform());
    seg_.noise.z_point = rng_.normal();
    seg_.noise.u_point_max = rng_.uniform();
    seg_.noise.u_cross = rng_.uniform();
    seg_.noise.z_hit = rng_.normal();
    seg_.noise.u_hit = rng_.uniform();
  } else {
    seg_.x_pre = base;
    seg_.seg_max = std::max(seg_.x_start, seg_.x_pre);
  }
  open_ = true;
  return seg_;
}

PathEvent ProcessSimulator::close_segment() {
  if (!open_) open_segment();
  const double y = spec_.jump().sample(rng_);
  PathEvent ev{seg_.index, seg_.t_end, seg_.x_pre, seg_.x_pre + y, seg_.seg_max};
  state_ = SimState{ev.n, ev.t_n, ev.x_post};
  open_ = false;
  return ev;
}

PathEvent next_event(const ProcessSpec& spec, SimState& state, RngStream& rng) {
  ProcessSimulator sim(spec, rng, state);
  sim.open_segment();
  PathEvent ev = sim.close_segment();
  state = sim.state();
  return ev;
}

// ---------------------------------------------------------------------------

ReplaySource::ReplaySource(std::vector<Segment> segments, std::vector<double> jumps)
    : segments_(std::move(segments)), jumps_(std::move(jumps)) {
  require(jumps_.size() <= segments_.size(), ErrorCode::InvalidArgument,
          "replay needs a segment for every jump");
}

const Segment& ReplaySource::open_segment() {
  require(next_ < segments_.size(), ErrorCode::InvalidArgument, "replay script exhausted");
  open_ = true;
  return segments_[next_];
}

PathEvent ReplaySource::close_segment() {
  require(open_ && next_ < jumps_.size(), ErrorCode::InvalidArgument,
          "replay script has no jump for segment " + std::to_string(next_ + 1));
  const Segment& s = segments_[next_];
  PathEvent ev{s.index, s.t_end, s.x_pre, s.x_pre + jumps_[next_], s.seg_max};
  ++next_;
  open_ = false;
  return ev;
}

ReplaySource ReplaySource::linear(double c, const std::vector<double>& spacings,
                                  const std::vector<double>& jumps) {
  require(spacings.size() >= jumps.size(), ErrorCode::InvalidArgument,
          "need a spacing for every jump");
  std::vector<Segment> segs;
  double t = 0.0;
  double x = 0.0;
  for (std::size_t k = 0; k < spacings.size(); ++k) {
    Segment s;
    s.index = static_cast<std::int64_t>(k) + 1;
    s.t_start = t;
    s.x_start = x;
    s.t_end = t + spacings[k];
    s.x_pre = x + c * spacings[k];
    s.seg_max = std::max(s.x_start, s.x_pre);
    s.drift = c;
    segs.push_back(s);
    t = s.t_end;
    if (k < jumps.size()) x = s.x_pre + jumps[k];
  }
  return ReplaySource(std::move(segs), jumps);
}

const Segment& RecordingSource::open_segment() {
  const Segment& s = inner_.open_segment();
  if (segments_.empty() || segments_.back().index != s.index) segments_.push_back(s);
  return s;
}

PathEvent RecordingSource::close_segment() {
  PathEvent ev = inner_.close_segment();
  jumps_.push_back(ev.jump());
  return ev;
}

SpliceSource::SpliceSource(const ProcessSpec& spec, std::vector<Segment> prefix_segments,
                           std::vector<double> prefix_jumps, std::size_t splice_at,
                           RngStream& rng)
    : spec_(spec),
      segments_(std::move(prefix_segments)),
      jumps_(std::move(prefix_jumps)),
      splice_at_(splice_at),
      rng_(rng) {
  require(splice_at_ >= 1 && segments_.size() >= splice_at_ && jumps_.size() + 1 >= splice_at_,
          ErrorCode::InvalidArgument, "splice point outside the recorded prefix");
}

const Segment& SpliceSource::open_segment() {
  if (tail_) return tail_->open_segment();
  return segments_[next_];
}

PathEvent SpliceSource::close_segment() {
  if (tail_) return tail_->close_segment();
  const Segment& s = segments_[next_];
  double y;
  if (next_ + 1 < splice_at_) {
    y = jumps_[next_];
  } else {
    y = spec_.jump().sample(rng_);
  }
  PathEvent ev{s.index, s.t_end, s.x_pre, s.x_pre + y, s.seg_max};
  ++next_;
  if (next_ >= splice_at_) {
    tail_ = std::make_unique<ProcessSimulator>(spec_, rng_, SimState{ev.n, ev.t_n, ev.x_post});
  }
  return ev;
}

}  // namespace htm
