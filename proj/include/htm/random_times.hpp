#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "htm/distributions.hpp"
#include "htm/process.hpp"
#include "htm/rng.hpp"

namespace htm {

enum class RuleKind {
  FixedTime,
  FixedJumpCount,
  FirstPassageBelow,
  FirstExceedanceOfJumpSum,
  IndependentTime,
  MinOf,
};

/// How a rule relates to the path: a stopping time of the path filtration, a
/// time independent of the path, or the minimum of one of each.
enum class Measurability { StoppingTime, Independent, Mixed };

using HorizonLaw = std::variant<TailModel, SpacingModel>;

/// Immutable description of a random time tau.
///
/// Every rule decides the event {tau < T_n} from the path strictly before T_n
/// (the segment [T_{n-1}, T_n) and its left limit) plus its own external
/// randomness. Ties resolve as tau = T_n belonging to {tau >= T_n}.
///
/// FixedTime is a constant time. It fails the plain "independent of future
/// increments" definition, but {t < T_n} is known once T_n is revealed, so it
/// satisfies the embedded-epoch condition used for renewal-type processes.
///
/// FirstExceedanceOfJumpSum(h) fires at the first epoch T_k with
/// sum_{i<=k} max(Y_i, 0) > h.
///
/// MinOf accepts two stopping times, a stopping time with a time that is
/// independent of the path (in either nesting), or two independent times on
/// distinct streams. Other combinations are rejected.
class TimeRule {
 public:
  static TimeRule fixed_time(double t);
  static TimeRule fixed_jump_count(std::int64_t n);
  static TimeRule first_passage_below(double level);
  static TimeRule first_exceedance_of_jump_sum(double threshold);
  static TimeRule independent_time(HorizonLaw law, std::uint32_t stream_id = 0);
  static TimeRule min_of(const TimeRule& a, const TimeRule& b);

  RuleKind kind() const { return kind_; }
  Measurability measurability() const { return measurability_; }
  double time() const { return value_; }       // FixedTime
  std::int64_t count() const { return count_; }  // FixedJumpCount
  double level() const { return value_; }      // FirstPassageBelow
  double threshold() const { return value_; }  // FirstExceedanceOfJumpSum
  const HorizonLaw& law() const { return *law_; }  // IndependentTime
  std::uint32_t stream_id() const { return stream_; }
  const TimeRule& first() const { return *a_; }   // MinOf
  const TimeRule& second() const { return *b_; }  // MinOf

  /// Stream ids of every IndependentTime node.
  std::vector<std::uint32_t> independent_streams() const;
  /// Upper bound on tau when one exists (FixedTime, nested MinOf).
  std::optional<double> time_bound() const;
  /// Deterministic horizon of FixedTime / FixedJumpCount rules.
  bool deterministic() const {
    return kind_ == RuleKind::FixedTime || kind_ == RuleKind::FixedJumpCount;
  }
  std::string describe() const;

 private:
  TimeRule() = default;

  RuleKind kind_ = RuleKind::FixedTime;
  Measurability measurability_ = Measurability::StoppingTime;
  double value_ = 0.0;
  std::int64_t count_ = 0;
  std::shared_ptr<const HorizonLaw> law_;
  std::uint32_t stream_ = 0;
  std::shared_ptr<const TimeRule> a_;
  std::shared_ptr<const TimeRule> b_;
};

double sample_horizon(const HorizonLaw& law, RngStream& rng);
double horizon_mean(const HorizonLaw& law);

/// What a rule may look at when deciding {tau < T_n}: the open segment n and
/// the last completed event (n - 1). The jump at T_n does not exist yet.
struct Prefix {
  const Segment& open;
  const PathEvent* last = nullptr;
};

/// tau with T_{n-1} <= tau < T_n. `x_tau` is set when the rule pins the path
/// value at tau (first passage to a level).
struct TauBefore {
  double tau = 0.0;
  std::optional<double> x_tau;
};

/// Empty when the rule has not fired yet ("NotYet").
using Decision = std::optional<TauBefore>;

/// Source of the external streams for IndependentTime nodes.
struct RuleSeeds {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
};

/// Per-replicate evaluation state of a TimeRule.
class RuleState {
 public:
  RuleState(const TimeRule& rule, const RuleSeeds& seeds);
  ~RuleState();
  RuleState(RuleState&&) noexcept;
  RuleState& operator=(RuleState&&) noexcept;

  /// I{tau < T_n} given the prefix. Throws InvalidPrefix on inconsistent epochs.
  Decision decide(const Prefix& prefix);
  /// Reveals the jump that closed the segment the rule just declined.
  void observe(const PathEvent& event);

 private:
  struct Node;
  std::unique_ptr<Node> root_;
};

inline Decision decide(RuleState& state, const Prefix& prefix) { return state.decide(prefix); }

struct MaxSample {
  double tau = 0.0;
  std::int64_t n_tau = 0;
  double m_tau = 0.0;
  double x_tau = 0.0;
  std::uint64_t replicate_seed = 0;
};

struct Caps {
  std::int64_t max_jumps = 10'000'000;
  double max_time = std::numeric_limits<double>::infinity();
};

/// Result of a capped run. When censored, `sample` holds the state at the
/// cap: its m_tau is a lower bound for the true M_tau.
struct RunOutcome {
  MaxSample sample;
  bool censored = false;
};

RunOutcome simulate_until(EventSource& source, RuleState& rule, const Caps& caps);

/// Streams events through the rule until tau. Throws CapExceeded.
MaxSample run_until(EventSource& source, RuleState& rule, const Caps& caps);

/// One replicate with streams derived from (master_seed, replicate).
RunOutcome simulate_replicate(const ProcessSpec& spec, const TimeRule& rule,
                              std::uint64_t master_seed, std::uint64_t replicate,
                              const Caps& caps);
MaxSample run_until(const ProcessSpec& spec, const TimeRule& rule, std::uint64_t master_seed,
                    std::uint64_t replicate, const Caps& caps = {});

// ---------------------------------------------------------------------------

struct MomentPair {
  double lhs = 0.0;
  double rhs = 0.0;
  /// Mean of the paired difference lhs_i - rhs_i and its standard error.
  double diff = 0.0;
  double diff_se = 0.0;
  double z = 0.0;
};

/// Monte Carlo check of the Wald-type identities.
///
/// Levy-type processes use E X_tau = m E tau and E(X_tau - m tau)^2 =
/// sigma^2 E tau with m = E X_1 and sigma^2 = Var X_1. Random walks and
/// renewal processes use the embedded version on the jump count:
/// E(X_tau - c tau) = E Y E N_tau and E(X_tau - c tau - E Y N_tau)^2 =
/// Var Y E N_tau.
struct WaldReport {
  bool embedded = false;
  std::int64_t n_reps = 0;
  double mean_tau = 0.0;
  double mean_n_tau = 0.0;
  MomentPair first;
  MomentPair second;
};

WaldReport wald_check(const ProcessSpec& spec, const TimeRule& rule, std::int64_t n_reps,
                      std::uint64_t master_seed, const Caps& caps = {});

}  // namespace htm
