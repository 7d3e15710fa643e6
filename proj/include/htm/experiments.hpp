#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "htm/asymptotics.hpp"
#include "htm/process.hpp"
#include "htm/random_times.hpp"

namespace htm {

using Json = nlohmann::ordered_json;

/// One Monte Carlo experiment. JSON keys: process, rule, x_grid, n_reps,
/// master_seed, caps, forms, output, regime_floor. Unknown keys are rejected.
struct ExperimentConfig {
  ProcessSpec process;
  TimeRule rule;
  std::vector<double> x_grid;
  std::int64_t n_reps = 0;
  std::uint64_t master_seed = 0;
  Caps caps{};
  std::vector<Form> forms;
  /// Empty writes to standard output.
  std::string output;
  /// Approximations below regime_floor * F(x, inf) are flagged as outside the
  /// regime where the leading term dominates.
  double regime_floor = 0.1;

  void validate() const;
};

Json to_json(const TailModel& m);
Json to_json(const SpacingModel& m);
Json to_json(const ProcessSpec& spec);
Json to_json(const TimeRule& rule);
Json to_json(const ExperimentConfig& config);

TailModel tail_model_from_json(const Json& j);
SpacingModel spacing_from_json(const Json& j);
ProcessSpec process_from_json(const Json& j);
TimeRule rule_from_json(const Json& j);
ExperimentConfig config_from_json(const Json& j);

/// Parses a JSON document; ConfigError on syntax or schema problems.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical serialized form (two-space indent, trailing LF).
std::string serialize(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

struct FormColumn {
  Form form = Form::CRP_NTau;
  double approx = 0.0;
  double approx_se = 0.0;
  double ratio = 0.0;
  bool in_regime = true;
};

/// One x of the comparison. Censored counts replicates stopped by the caps
/// whose partial maximum does not settle M > x; they are neither hits nor
/// misses, and p_hat = hits / n_reps is then a lower estimate.
struct TailEstimate {
  double x = 0.0;
  std::int64_t hits = 0;
  std::int64_t n_reps = 0;
  std::int64_t censored = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<FormColumn> forms;
};

struct McResult {
  std::vector<TailEstimate> rows;
  /// Per replicate, indexed by replicate number.
  std::vector<std::int64_t> n_tau;
  std::vector<double> tau;
  std::int64_t censored_total = 0;
};

/// Maximum tolerated fraction of censored replicates.
inline constexpr double kMaxCensoredFraction = 1e-3;

/// Runs config.n_reps replicates on `workers` threads. Results do not depend
/// on the worker count. Throws CapExceeded past the censoring limit.
McResult mc_tail_estimate(const ExperimentConfig& config, int workers = 1);

bool form_applicable(Form form, const ProcessSpec& spec, const TimeRule& rule);
std::vector<Form> applicable_forms(const ProcessSpec& spec, const TimeRule& rule);

/// E N_t for deterministic rules: closed form where the spacing allows it,
/// the replicate mean of N_tau otherwise.
double expected_jumps(const ProcessSpec& spec, const TimeRule& rule,
                      const std::vector<std::int64_t>& n_tau);

/// The selected form at x from the replicates' horizon samples.
ApproxResult evaluate_form(Form form, double x, const ExperimentConfig& config,
                           const McResult& run);

/// Ratio p_hat / approx with its Wilson band, at the largest x.
struct FormSummary {
  Form form = Form::CRP_NTau;
  double x = 0.0;
  double ratio = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool in_regime = true;
  std::int64_t rows_outside_regime = 0;
};

struct Comparison {
  std::vector<Form> forms;
  McResult run;
  std::vector<FormSummary> summary;
};

/// Forms from the config, or every applicable form when the list is empty.
/// FormMismatch when a requested form does not apply or none does.
std::vector<Form> resolve_forms(const ExperimentConfig& config);

Comparison compare(const ExperimentConfig& config, int workers = 1);

/// `x,hits,n_reps,p_hat,ci_lo,ci_hi,censored` plus `<form>_approx,<form>_ratio`
/// per form.
std::string tail_csv(const std::vector<TailEstimate>& rows, const std::vector<Form>& forms);
std::string summary_json(const FormSummary& s);

/// Approximations only: `x` plus `<form>_approx,<form>_se` per form.
std::string approx_csv(const ExperimentConfig& config, int workers = 1);

/// --workers value, else HTM_DEFAULT_WORKERS, else 1.
int resolve_workers(std::optional<int> flag);

}  // namespace htm
