#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "htm/distributions.hpp"
#include "htm/process.hpp"
#include "htm/random_times.hpp"

namespace htm {

struct ReportRow {
  std::string label;
  double point = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  /// Row-specific statistic (standard error, z-score or running constant).
  double stat = 0.0;
};

/// Outcome of one validation procedure. The verdict is recomputable from
/// `rows` plus the band recorded in `inputs`.
struct ValidationReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<ReportRow> rows;
  bool pass = false;
  std::string reason;
  std::uint64_t seed = 0;

  /// `label,point,lhs,rhs,ratio,stat` rows, 17 significant digits, LF.
  std::string to_csv() const;
  /// Single-line JSON verdict record.
  std::string verdict_json() const;
};

std::string format_double(double v);
/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

// ---------------------------------------------------------------------------

struct SstarBand {
  double lo = 0.9;
  double hi = 1.25;
};

/// sstar_ratio over an increasing grid. Passes when the last ratio lies in
/// the band and is no farther from 1 than the one before it.
ValidationReport validate_sstar(const TailModel& model, const std::vector<double>& x_grid,
                                const SstarBand& band = {});

/// Default grid 10^2 .. 10^6.
std::vector<double> default_sstar_grid();

struct KestenValidationOptions {
  /// c in G_tau(x) = min(1, (1/c) E int_0^{c tau} F(x+y, inf) dy).
  double c = 1.0;
  /// Grid step; <= 0 selects 0.01 a+.
  double step = 0.0;
  double cutoff = 1e-10;
  std::int64_t horizon_draws = 1000;
  std::uint64_t seed = 1;
  double ceiling = 1e4;
  KestenOptions kesten{};
};

/// G_tau as a function, from horizon draws.
std::function<double(double)> horizon_tail(const TailModel& model, std::vector<double> horizons,
                                           double c);

ValidationReport validate_kesten(const TailModel& model, const HorizonLaw& horizon, double delta,
                                 int n_max, const KestenValidationOptions& options = {});

/// Both identities of wald_check as a report; passes when |z| <= z_max.
ValidationReport validate_wald(const ProcessSpec& spec, const TimeRule& rule, std::int64_t n_reps,
                               std::uint64_t seed, const Caps& caps = {}, double z_max = 4.0);

struct LemmaSupOptions {
  std::int64_t n_reps = 10'000;
  std::uint64_t seed = 1;
  /// Length of the paths that estimate E sup_t (X_t - (E X_1 + eps) t).
  double sup_horizon = 0.0;  // <= 0 selects 200 / eps
  Caps caps{};
};

/// E(X_tau - (E X_1 + eps) tau) for every rule against the long-path estimate
/// of E sup_t (X_t - (E X_1 + eps) t), with signed E X_1.
ValidationReport validate_lemma_sup(const ProcessSpec& spec, double epsilon,
                                    const std::vector<TimeRule>& rules,
                                    const LemmaSupOptions& options = {});

struct StoppingTOptions {
  std::int64_t n_reps = 100'000;
  std::uint64_t seed = 1;
  double band_lo = 0.8;
  double band_hi = 1.2;
  Caps caps{};
};

/// Compares the N_tau and lambda tau integrated forms with a lambda E tau F(x)
/// for every rule capped at T.
ValidationReport validate_stopping_T(const ProcessSpec& spec, const std::vector<TimeRule>& rules,
                                     double T, const std::vector<double>& x_grid,
                                     const StoppingTOptions& options = {});

}  // namespace htm
