#include "htm/random_times.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "htm/error.hpp"
#include "htm/stats.hpp"

namespace htm {
namespace {

std::string law_name(const HorizonLaw& law) {
  return std::visit([](const auto& m) { return m.family_name(); }, law);
}

}  // namespace

double sample_horizon(const HorizonLaw& law, RngStream& rng) {
  return std::visit([&](const auto& m) { return m.sample(rng); }, law);
}

double horizon_mean(const HorizonLaw& law) {
  return std::visit([](const auto& m) { return m.mean(); }, law);
}

TimeRule TimeRule::fixed_time(double t) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidRule, "FixedTime needs t >= 0");
  TimeRule r;
  r.kind_ = RuleKind::FixedTime;
  r.value_ = t;
  return r;
}

TimeRule TimeRule::fixed_jump_count(std::int64_t n) {
  require(n >= 1, ErrorCode::InvalidRule, "FixedJumpCount needs n >= 1");
  TimeRule r;
  r.kind_ = RuleKind::FixedJumpCount;
  r.count_ = n;
  return r;
}

TimeRule TimeRule::first_passage_below(double level) {
  require(std::isfinite(level) && level < 0.0, ErrorCode::InvalidRule,
          "FirstPassageBelow needs a level below the start value 0");
  TimeRule r;
  r.kind_ = RuleKind::FirstPassageBelow;
  r.value_ = level;
  return r;
}

TimeRule TimeRule::first_exceedance_of_jump_sum(double threshold) {
  require(std::isfinite(threshold) && threshold >= 0.0, ErrorCode::InvalidRule,
          "FirstExceedanceOfJumpSum needs threshold >= 0");
  TimeRule r;
  r.kind_ = RuleKind::FirstExceedanceOfJumpSum;
  r.value_ = threshold;
  return r;
}

TimeRule TimeRule::independent_time(HorizonLaw law, std::uint32_t stream_id) {
  if (const auto* tm = std::get_if<TailModel>(&law)) {
    require(tm->support_min() >= 0.0, ErrorCode::InvalidRule,
            "IndependentTime law must live on [0, inf)");
  }
  TimeRule r;
  r.kind_ = RuleKind::IndependentTime;
  r.measurability_ = Measurability::Independent;
  r.law_ = std::make_shared<const HorizonLaw>(std::move(law));
  r.stream_ = stream_id;
  return r;
}

TimeRule TimeRule::min_of(const TimeRule& a, const TimeRule& b) {
  using M = Measurability;
  const M ma = a.measurability();
  const M mb = b.measurability();
  M combined;
  if (ma == M::StoppingTime && mb == M::StoppingTime) {
    combined = M::StoppingTime;
  } else if ((ma == M::StoppingTime && mb != M::StoppingTime) ||
             (mb == M::StoppingTime && ma != M::StoppingTime)) {
    // A stopping time with an independent (or already mixed) time.
    combined = M::Mixed;
  } else if (ma == M::Independent && mb == M::Independent) {
    const auto sa = a.independent_streams();
    const auto sb = b.independent_streams();
    for (auto s : sa) {
      require(std::find(sb.begin(), sb.end(), s) == sb.end(), ErrorCode::InvalidRule,
              "MinOf of independent times needs distinct streams (shared stream " +
                  std::to_string(s) + ")");
    }
    combined = M::Independent;
  } else {
    fail(ErrorCode::InvalidRule,
         "MinOf(" + a.describe() + ", " + b.describe() +
             ") is not a sanctioned closure: only stopping/stopping, stopping/independent "
             "and independent/independent minima are admitted");
  }
  TimeRule r;
  r.kind_ = RuleKind::MinOf;
  r.measurability_ = combined;
  r.a_ = std::make_shared<const TimeRule>(a);
  r.b_ = std::make_shared<const TimeRule>(b);
  const auto streams = r.independent_streams();
  const std::set<std::uint32_t> unique(streams.begin(), streams.end());
  require(unique.size() == streams.size(), ErrorCode::InvalidRule,
          "independent times inside one rule must use distinct streams");
  return r;
}

std::vector<std::uint32_t> TimeRule::independent_streams() const {
  if (kind_ == RuleKind::IndependentTime) return {stream_};
  if (kind_ != RuleKind::MinOf) return {};
  auto out = a_->independent_streams();
  const auto more = b_->independent_streams();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::optional<double> TimeRule::time_bound() const {
  if (kind_ == RuleKind::FixedTime) return value_;
  if (kind_ == RuleKind::IndependentTime) {
    if (const auto* sm = std::get_if<SpacingModel>(law_.get())) {
      if (const auto* u = std::get_if<spacing::Uniform>(&sm->family())) return u->hi;
      if (const auto* d = std::get_if<spacing::Deterministic>(&sm->family())) return d->period;
    } else {
      const auto& tm = std::get<TailModel>(*law_);
      if (std::isfinite(tm.support_max())) return tm.support_max();
    }
    return std::nullopt;
  }
  if (kind_ != RuleKind::MinOf) return std::nullopt;
  const auto ba = a_->time_bound();
  const auto bb = b_->time_bound();
  if (ba && bb) return std::min(*ba, *bb);
  return ba ? ba : bb;
}

std::string TimeRule::describe() const {
  std::ostringstream os;
  os.precision(10);
  switch (kind_) {
    case RuleKind::FixedTime: os << "FixedTime(" << value_ << ")"; break;
    case RuleKind::FixedJumpCount: os << "FixedJumpCount(" << count_ << ")"; break;
    case RuleKind::FirstPassageBelow: os << "FirstPassageBelow(" << value_ << ")"; break;
    case RuleKind::FirstExceedanceOfJumpSum:
      os << "FirstExceedanceOfJumpSum(" << value_ << ")";
      break;
    case RuleKind::IndependentTime:
      os << "IndependentTime(" << law_name(*law_) << ", mean " << horizon_mean(*law_)
         << ", stream " << stream_ << ")";
      break;
    case RuleKind::MinOf: os << "MinOf(" << a_->describe() << ", " << b_->describe() << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

struct RuleState::Node {
  TimeRule rule;
  double horizon = 0.0;
  double jump_sum = 0.0;
  std::unique_ptr<Node> a;
  std::unique_ptr<Node> b;

  Node(const TimeRule& r, const RuleSeeds& seeds) : rule(r) {
    if (rule.kind() == RuleKind::IndependentTime) {
      RngStream rng(stream_seed(seeds.master_seed, seeds.replicate, StreamRole::IndependentBase,
                                rule.stream_id()));
      horizon = sample_horizon(rule.law(), rng);
    } else if (rule.kind() == RuleKind::MinOf) {
      a = std::make_unique<Node>(rule.first(), seeds);
      b = std::make_unique<Node>(rule.second(), seeds);
    }
  }

  Decision decide(const Segment& seg) {
    switch (rule.kind()) {
      case RuleKind::FixedTime:
        if (rule.time() < seg.t_end) return TauBefore{std::max(rule.time(), seg.t_start), {}};
        return std::nullopt;
      case RuleKind::FixedJumpCount:
        if (seg.index > rule.count()) return TauBefore{seg.t_start, seg.x_start};
        return std::nullopt;
      case RuleKind::FirstPassageBelow: {
        const auto t = seg.first_passage_below(rule.level());
        if (!t) return std::nullopt;
        if (*t <= seg.t_start) return TauBefore{seg.t_start, seg.x_start};
        return TauBefore{*t, rule.level()};
      }
      case RuleKind::FirstExceedanceOfJumpSum:
        if (jump_sum > rule.threshold()) return TauBefore{seg.t_start, seg.x_start};
        return std::nullopt;
      case RuleKind::IndependentTime:
        if (horizon < seg.t_end) return TauBefore{std::max(horizon, seg.t_start), {}};
        return std::nullopt;
      case RuleKind::MinOf: {
        // Both operands see every prefix so their state stays current.
        Decision da = a->decide(seg);
        Decision db = b->decide(seg);
        if (da && db) return db->tau < da->tau ? db : da;
        return da ? da : db;
      }
    }
    return std::nullopt;
  }

  void observe(const PathEvent& ev) {
    if (rule.kind() == RuleKind::FirstExceedanceOfJumpSum) {
      jump_sum += std::max(ev.jump(), 0.0);
    } else if (rule.kind() == RuleKind::MinOf) {
      a->observe(ev);
      b->observe(ev);
    }
  }
};

RuleState::RuleState(const TimeRule& rule, const RuleSeeds& seeds)
    : root_(std::make_unique<Node>(rule, seeds)) {}
RuleState::~RuleState() = default;
RuleState::RuleState(RuleState&&) noexcept = default;
RuleState& RuleState::operator=(RuleState&&) noexcept = default;

Decision RuleState::decide(const Prefix& prefix) {
  const Segment& seg = prefix.open;
  const bool ordered = seg.t_end > seg.t_start;
  const bool linked = prefix.last ? (prefix.last->n + 1 == seg.index &&
                                     prefix.last->t_n == seg.t_start &&
                                     prefix.last->x_post == seg.x_start)
                                  : (seg.index == 1 && seg.t_start == 0.0);
  if (!ordered || !linked) {
    fail(ErrorCode::InvalidPrefix,
         "segment " + std::to_string(seg.index) + " is not a continuation of the prefix");
  }
  return root_->decide(seg);
}

void RuleState::observe(const PathEvent& event) { root_->observe(event); }

// ---------------------------------------------------------------------------

RunOutcome simulate_until(EventSource& source, RuleState& rule, const Caps& caps) {
  require(caps.max_jumps > 0 && caps.max_time > 0.0, ErrorCode::InvalidArgument,
          "caps must be positive");
  double running_max = 0.0;  // X_0 = 0
  std::int64_t jumps = 0;
  PathEvent last;
  bool has_last = false;
  for (;;) {
    const Segment& seg = source.open_segment();
    const Decision d = rule.decide(Prefix{seg, has_last ? &last : nullptr});
    if (d) {
      const double x_tau = d->x_tau ? *d->x_tau : seg.value_at(d->tau);
      const double partial = seg.max_until(d->tau, x_tau);
      RunOutcome out;
      out.sample.tau = d->tau;
      out.sample.n_tau = seg.index - 1;
      out.sample.m_tau = std::max({running_max, partial, x_tau});
      out.sample.x_tau = x_tau;
      return out;
    }
    // tau >= T_n: the whole segment precedes tau.
    if (jumps >= caps.max_jumps || seg.t_end > caps.max_time) {
      RunOutcome out;
      out.censored = true;
      out.sample.tau = seg.t_start;
      out.sample.n_tau = jumps;
      out.sample.m_tau = std::max(running_max, seg.seg_max);
      out.sample.x_tau = seg.x_start;
      return out;
    }
    last = source.close_segment();
    has_last = true;
    ++jumps;
    running_max = std::max({running_max, last.seg_max, last.x_post});
    rule.observe(last);
  }
}

MaxSample run_until(EventSource& source, RuleState& rule, const Caps& caps) {
  const RunOutcome out = simulate_until(source, rule, caps);
  if (out.censored) {
    fail(ErrorCode::CapExceeded, "caps reached before tau (" +
                                     std::to_string(out.sample.n_tau) + " jumps, t = " +
                                     std::to_string(out.sample.tau) + ")");
  }
  return out.sample;
}

RunOutcome simulate_replicate(const ProcessSpec& spec, const TimeRule& rule,
                              std::uint64_t master_seed, std::uint64_t replicate,
                              const Caps& caps) {
  const std::uint64_t seed = stream_seed(master_seed, replicate, StreamRole::Path);
  RngStream path(seed);
  ProcessSimulator sim(spec, path);
  RuleState state(rule, RuleSeeds{master_seed, replicate});
  RunOutcome out = simulate_until(sim, state, caps);
  out.sample.replicate_seed = seed;
  return out;
}

MaxSample run_until(const ProcessSpec& spec, const TimeRule& rule, std::uint64_t master_seed,
                    std::uint64_t replicate, const Caps& caps) {
  const RunOutcome out = simulate_replicate(spec, rule, master_seed, replicate, caps);
  if (out.censored) {
    fail(ErrorCode::CapExceeded, "caps reached before tau on replicate " +
                                     std::to_string(replicate));
  }
  return out.sample;
}

// ---------------------------------------------------------------------------

WaldReport wald_check(const ProcessSpec& spec, const TimeRule& rule, std::int64_t n_reps,
                      std::uint64_t master_seed, const Caps& caps) {
  require(n_reps >= 2, ErrorCode::InvalidArgument, "wald_check needs at least 2 replicates");
  WaldReport rep;
  rep.embedded = !spec.levy_type();
  rep.n_reps = n_reps;
  const double c = spec.linear_drift();
  const double b = spec.jump().mean();
  const double var_y = spec.jump().variance();
  const double m = spec.mean_x1();
  const double var_x1 = spec.variance_x1();

  RunningStats tau, ntau, lhs1, rhs1, d1, lhs2, rhs2, d2;
  for (std::int64_t i = 0; i < n_reps; ++i) {
    const MaxSample s = run_until(spec, rule, master_seed, static_cast<std::uint64_t>(i), caps);
    const double n = static_cast<double>(s.n_tau);
    tau.push(s.tau);
    ntau.push(n);
    double l1, r1, l2, r2;
    if (rep.embedded) {
      const double centered = s.x_tau - c * s.tau;
      l1 = centered;
      r1 = b * n;
      const double dev = centered - b * n;
      l2 = dev * dev;
      r2 = var_y * n;
    } else {
      l1 = s.x_tau;
      r1 = m * s.tau;
      const double dev = s.x_tau - m * s.tau;
      l2 = dev * dev;
      r2 = var_x1 * s.tau;
    }
    lhs1.push(l1);
    rhs1.push(r1);
    d1.push(l1 - r1);
    lhs2.push(l2);
    rhs2.push(r2);
    d2.push(l2 - r2);
  }
  rep.mean_tau = tau.mean();
  rep.mean_n_tau = ntau.mean();
  rep.first = {lhs1.mean(), rhs1.mean(), d1.mean(), d1.std_error(),
               z_score(d1.mean(), d1.std_error())};
  rep.second = {lhs2.mean(), rhs2.mean(), d2.mean(), d2.std_error(),
                z_score(d2.mean(), d2.std_error())};
  return rep;
}

}  // namespace htm
