#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "htm/distributions.hpp"
#include "htm/rng.hpp"

namespace htm {

enum class ProcessKind { RandomWalk, CompoundRenewal, CompoundPoisson, Levy };

std::string to_string(ProcessKind kind);

struct ProcessOptions {
  // Zero or positive drift is only useful for hand-checked fixtures.
  bool require_negative_drift = true;
};

/// One process of the form X_t = sum_{i <= N_t} Y_i + c t (+ sigma W_t for Levy).
///
/// Random walks use T_n = n and c = 0. Compound Poisson and Levy processes use
/// exponential spacings with rate lambda. The Levy kind simulates drift,
/// Brownian motion and the compound Poisson part of jumps outside (-1, 1);
/// compensated small jumps are not simulated.
class ProcessSpec {
 public:
  static ProcessSpec random_walk(TailModel jump, ProcessOptions opt = {});
  static ProcessSpec compound_renewal(double c, SpacingModel spacing, TailModel jump,
                                      ProcessOptions opt = {});
  static ProcessSpec compound_poisson(double c, double rate, TailModel jump,
                                      ProcessOptions opt = {});
  static ProcessSpec levy(double drift, double sigma, double big_jump_rate, TailModel big_jump,
                          ProcessOptions opt = {});

  ProcessKind kind() const { return kind_; }
  const TailModel& jump() const { return jump_; }
  const SpacingModel& spacing() const { return spacing_; }
  /// c for renewal/Poisson kinds, the Levy drift, 0 for random walks.
  double linear_drift() const { return drift_; }
  double sigma() const { return sigma_; }
  /// lambda = 1 / E(T_1): jump intensity (1 for random walks).
  double jump_rate() const { return 1.0 / spacing_.mean(); }

  /// a with E(c T_1 + Y_1) = -a.
  double a() const;
  /// m = a * lambda, the drift magnitude per unit time.
  double m() const { return a() * jump_rate(); }
  /// Signed E X_1 for the Levy-type kinds (compound Poisson, Levy).
  double mean_x1() const { return -m(); }
  /// Var X_1 for the Levy-type kinds: sigma^2 + lambda E Y^2.
  double variance_x1() const;
  bool levy_type() const {
    return kind_ == ProcessKind::CompoundPoisson || kind_ == ProcessKind::Levy;
  }

  std::string describe() const;

 private:
  ProcessSpec(ProcessKind kind, double drift, double sigma, SpacingModel spacing, TailModel jump)
      : kind_(kind), drift_(drift), sigma_(sigma), spacing_(spacing), jump_(jump) {}
  void validate(const ProcessOptions& opt) const;

  ProcessKind kind_;
  double drift_ = 0.0;
  double sigma_ = 0.0;
  SpacingModel spacing_;
  TailModel jump_;
};

/// P{c T_1 > x} / P{Y_1 > x} at x = 10^2 .. 10^6, the admissibility ratio for
/// positive linear drift. Returned for inspection; ProcessSpec construction
/// rejects sequences that are not decreasing toward zero.
std::vector<double> drift_admissibility_ratios(double c, const SpacingModel& spacing,
                                               const TailModel& jump);

/// Randomness reserved for in-segment queries of a Brownian segment. Drawn
/// whether or not a rule uses it, so the path stream position never depends
/// on the rule.
struct BridgeNoise {
  double z_point = 0.0;      // bridge value at an interior time
  double u_point_max = 0.5;  // bridge maximum up to that time
  double u_cross = 0.5;      // whether a level is crossed
  double z_hit = 0.0;        // crossing time
  double u_hit = 0.5;
};

/// The path on [T_{n-1}, T_n) plus its left limit at T_n. Holds nothing about
/// the jump at T_n.
struct Segment {
  std::int64_t index = 0;  // n
  double t_start = 0.0;    // T_{n-1}
  double x_start = 0.0;    // X_{T_{n-1}}
  double t_end = 0.0;      // T_n
  double x_pre = 0.0;      // X_{T_n - 0}
  double seg_max = 0.0;    // max of X over [T_{n-1}, T_n)
  double drift = 0.0;
  double sigma = 0.0;
  BridgeNoise noise;

  bool brownian() const { return sigma > 0.0; }
  /// X_t for t in [t_start, t_end].
  double value_at(double t) const;
  /// max of X over [t_start, t] given X_t = x_t.
  double max_until(double t, double x_t) const;
  /// First time in [t_start, t_end) at which X <= level, if any.
  std::optional<double> first_passage_below(double level) const;
};

struct PathEvent {
  std::int64_t n = 0;
  double t_n = 0.0;
  double x_pre = 0.0;
  double x_post = 0.0;
  double seg_max = 0.0;

  double jump() const { return x_post - x_pre; }
};

/// Produces a path one segment at a time. open_segment reveals [T_{n-1}, T_n);
/// close_segment then samples the jump at T_n.
class EventSource {
 public:
  virtual ~EventSource() = default;
  virtual const Segment& open_segment() = 0;
  virtual PathEvent close_segment() = 0;
};

struct SimState {
  std::int64_t n = 0;
  double t = 0.0;
  double x = 0.0;
};

class ProcessSimulator final : public EventSource {
 public:
  ProcessSimulator(const ProcessSpec& spec, RngStream& rng, SimState start = {});

  const Segment& open_segment() override;
  PathEvent close_segment() override;
  SimState state() const { return state_; }

 private:
  const ProcessSpec& spec_;
  RngStream& rng_;
  SimState state_;
  Segment seg_;
  bool open_ = false;
};

/// Advances one jump from `state`: open + close.
PathEvent next_event(const ProcessSpec& spec, SimState& state, RngStream& rng);

/// Replays a recorded path: segments[k] and jumps[k] for k = 0, 1, ...
class ReplaySource final : public EventSource {
 public:
  ReplaySource(std::vector<Segment> segments, std::vector<double> jumps);

  const Segment& open_segment() override;
  PathEvent close_segment() override;

  /// Linear-drift path from explicit spacings and jumps; the final segment
  /// has no jump and is opened but never closed.
  static ReplaySource linear(double c, const std::vector<double>& spacings,
                             const std::vector<double>& jumps);

 private:
  std::vector<Segment> segments_;
  std::vector<double> jumps_;
  std::size_t next_ = 0;
  bool open_ = false;
};

/// Wraps a source and records what it emits.
class RecordingSource final : public EventSource {
 public:
  explicit RecordingSource(EventSource& inner) : inner_(inner) {}
  const Segment& open_segment() override;
  PathEvent close_segment() override;

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<double>& jumps() const { return jumps_; }

 private:
  EventSource& inner_;
  std::vector<Segment> segments_;
  std::vector<double> jumps_;
};

/// Shares the first `splice_at` segments and the first splice_at - 1 jumps
/// with a recorded path; the jump at T_{splice_at} and everything after come
/// from `rng`.
class SpliceSource final : public EventSource {
 public:
  SpliceSource(const ProcessSpec& spec, std::vector<Segment> prefix_segments,
               std::vector<double> prefix_jumps, std::size_t splice_at, RngStream& rng);

  const Segment& open_segment() override;
  PathEvent close_segment() override;

 private:
  const ProcessSpec& spec_;
  std::vector<Segment> segments_;
  std::vector<double> jumps_;
  std::size_t splice_at_;
  RngStream& rng_;
  std::size_t next_ = 0;
  std::unique_ptr<ProcessSimulator> tail_;
};

}  // namespace htm
