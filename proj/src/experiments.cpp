#include "htm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "htm/bounds.hpp"
#include "htm/error.hpp"
#include "htm/stats.hpp"

namespace htm {
namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) fail(ErrorCode::ConfigError, where + ": unknown key '" + item.key() + "'");
  }
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorCode::ConfigError, where + ": missing key '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) fail(ErrorCode::ConfigError, where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::int64_t integer(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) fail(ErrorCode::ConfigError, where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string text(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) fail(ErrorCode::ConfigError, where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------
// JSON schema

Json to_json(const TailModel& m) {
  Json j;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, law::Pareto>) {
          j["family"] = "pareto";
          j["alpha"] = f.alpha;
          j["xm"] = f.xm;
        } else if constexpr (std::is_same_v<T, law::Lognormal>) {
          j["family"] = "lognormal";
          j["mu"] = f.mu;
          j["sigma"] = f.sigma;
        } else if constexpr (std::is_same_v<T, law::Weibull>) {
          j["family"] = "weibull";
          j["shape"] = f.shape;
          j["scale"] = f.scale;
        } else if constexpr (std::is_same_v<T, law::Exponential>) {
          j["family"] = "exponential";
          j["rate"] = f.rate;
        } else if constexpr (std::is_same_v<T, law::TwoPoint>) {
          j["family"] = "two_point";
          j["p"] = f.p;
          j["up"] = f.up;
          j["down"] = f.down;
        } else {
          j["family"] = "degenerate";
          j["value"] = f.value;
        }
      },
      m.family());
  if (!std::holds_alternative<law::Degenerate>(m.family())) j["shift"] = m.shift();
  return j;
}

Json to_json(const SpacingModel& m) {
  Json j;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, spacing::Exponential>) {
          j["family"] = "exponential";
          j["rate"] = f.rate;
        } else if constexpr (std::is_same_v<T, spacing::Deterministic>) {
          j["family"] = "deterministic";
          j["period"] = f.period;
        } else {
          j["family"] = "uniform";
          j["lo"] = f.lo;
          j["hi"] = f.hi;
        }
      },
      m.family());
  return j;
}

Json to_json(const ProcessSpec& spec) {
  Json j;
  switch (spec.kind()) {
    case ProcessKind::RandomWalk:
      j["kind"] = "random_walk";
      break;
    case ProcessKind::CompoundRenewal:
      j["kind"] = "compound_renewal";
      j["c"] = spec.linear_drift();
      j["spacing"] = to_json(spec.spacing());
      break;
    case ProcessKind::CompoundPoisson:
      j["kind"] = "compound_poisson";
      j["c"] = spec.linear_drift();
      j["rate"] = spec.jump_rate();
      break;
    case ProcessKind::Levy:
      j["kind"] = "levy";
      j["drift"] = spec.linear_drift();
      j["sigma"] = spec.sigma();
      j["rate"] = spec.jump_rate();
      break;
  }
  j["jump"] = to_json(spec.jump());
  return j;
}

Json to_json(const TimeRule& rule) {
  Json j;
  switch (rule.kind()) {
    case RuleKind::FixedTime:
      j["kind"] = "fixed_time";
      j["t"] = rule.time();
      break;
    case RuleKind::FixedJumpCount:
      j["kind"] = "fixed_jump_count";
      j["n"] = rule.count();
      break;
    case RuleKind::FirstPassageBelow:
      j["kind"] = "first_passage_below";
      j["level"] = rule.level();
      break;
    case RuleKind::FirstExceedanceOfJumpSum:
      j["kind"] = "first_exceedance_of_jump_sum";
      j["threshold"] = rule.threshold();
      break;
    case RuleKind::IndependentTime: {
      j["kind"] = "independent_time";
      Json law;
      if (const auto* s = std::get_if<SpacingModel>(&rule.law())) {
        law = to_json(*s);
        law["type"] = "spacing";
      } else {
        law = to_json(std::get<TailModel>(rule.law()));
        law["type"] = "tail";
      }
      j["law"] = law;
      j["stream"] = rule.stream_id();
      break;
    }
    case RuleKind::MinOf:
      j["kind"] = "min_of";
      j["a"] = to_json(rule.first());
      j["b"] = to_json(rule.second());
      break;
  }
  return j;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["process"] = to_json(c.process);
  j["rule"] = to_json(c.rule);
  j["x_grid"] = c.x_grid;
  j["n_reps"] = c.n_reps;
  j["master_seed"] = c.master_seed;
  j["caps"] = Json{{"max_jumps", c.caps.max_jumps}, {"max_time", finite_or_null(c.caps.max_time)}};
  Json forms = Json::array();
  for (Form f : c.forms) forms.push_back(to_string(f));
  j["forms"] = forms;
  j["output"] = c.output;
  j["regime_floor"] = c.regime_floor;
  return j;
}

TailModel tail_model_from_json(const Json& j) {
  const std::string w = "jump";
  const std::string family = text(j, "family", w);
  if (family == "pareto") {
    check_keys(j, {"family", "alpha", "xm", "shift", "type"}, w);
    return TailModel::pareto(number(j, "alpha", w), number(j, "xm", w), number_or(j, "shift", 0, w));
  }
  if (family == "lognormal") {
    check_keys(j, {"family", "mu", "sigma", "shift", "type"}, w);
    return TailModel::lognormal(number(j, "mu", w), number(j, "sigma", w),
                                number_or(j, "shift", 0, w));
  }
  if (family == "weibull") {
    check_keys(j, {"family", "shape", "scale", "shift", "type"}, w);
    return TailModel::weibull(number(j, "shape", w), number(j, "scale", w),
                              number_or(j, "shift", 0, w));
  }
  if (family == "exponential") {
    check_keys(j, {"family", "rate", "shift", "type"}, w);
    return TailModel::exponential(number(j, "rate", w), number_or(j, "shift", 0, w));
  }
  if (family == "two_point") {
    check_keys(j, {"family", "p", "up", "down", "shift", "type"}, w);
    return TailModel::two_point(number(j, "p", w), number(j, "up", w), number(j, "down", w),
                                number_or(j, "shift", 0, w));
  }
  if (family == "degenerate") {
    check_keys(j, {"family", "value", "type"}, w);
    return TailModel::degenerate(number(j, "value", w));
  }
  fail(ErrorCode::ConfigError, "unknown jump family '" + family + "'");
}

SpacingModel spacing_from_json(const Json& j) {
  const std::string w = "spacing";
  const std::string family = text(j, "family", w);
  if (family == "exponential") {
    check_keys(j, {"family", "rate", "type"}, w);
    return SpacingModel::exponential(number(j, "rate", w));
  }
  if (family == "deterministic") {
    check_keys(j, {"family", "period", "type"}, w);
    return SpacingModel::deterministic(number(j, "period", w));
  }
  if (family == "uniform") {
    check_keys(j, {"family", "lo", "hi", "type"}, w);
    return SpacingModel::uniform(number(j, "lo", w), number(j, "hi", w));
  }
  fail(ErrorCode::ConfigError, "unknown spacing family '" + family + "'");
}

ProcessSpec process_from_json(const Json& j) {
  const std::string w = "process";
  const std::string kind = text(j, "kind", w);
  if (kind == "random_walk") {
    check_keys(j, {"kind", "jump"}, w);
    return ProcessSpec::random_walk(tail_model_from_json(field(j, "jump", w)));
  }
  if (kind == "compound_renewal") {
    check_keys(j, {"kind", "c", "spacing", "jump"}, w);
    return ProcessSpec::compound_renewal(number(j, "c", w), spacing_from_json(field(j, "spacing", w)),
                                         tail_model_from_json(field(j, "jump", w)));
  }
  if (kind == "compound_poisson") {
    check_keys(j, {"kind", "c", "rate", "jump"}, w);
    return ProcessSpec::compound_poisson(number(j, "c", w), number(j, "rate", w),
                                         tail_model_from_json(field(j, "jump", w)));
  }
  if (kind == "levy") {
    check_keys(j, {"kind", "drift", "sigma", "rate", "jump"}, w);
    return ProcessSpec::levy(number(j, "drift", w), number(j, "sigma", w), number(j, "rate", w),
                             tail_model_from_json(field(j, "jump", w)));
  }
  fail(ErrorCode::ConfigError, "unknown process kind '" + kind + "'");
}

TimeRule rule_from_json(const Json& j) {
  const std::string w = "rule";
  const std::string kind = text(j, "kind", w);
  if (kind == "fixed_time") {
    check_keys(j, {"kind", "t"}, w);
    return TimeRule::fixed_time(number(j, "t", w));
  }
  if (kind == "fixed_jump_count") {
    check_keys(j, {"kind", "n"}, w);
    return TimeRule::fixed_jump_count(integer(j, "n", w));
  }
  if (kind == "first_passage_below") {
    check_keys(j, {"kind", "level"}, w);
    return TimeRule::first_passage_below(number(j, "level", w));
  }
  if (kind == "first_exceedance_of_jump_sum") {
    check_keys(j, {"kind", "threshold"}, w);
    return TimeRule::first_exceedance_of_jump_sum(number(j, "threshold", w));
  }
  if (kind == "independent_time") {
    check_keys(j, {"kind", "law", "stream"}, w);
    const Json& law = field(j, "law", w);
    const std::string type = text(law, "type", "rule.law");
    const auto stream = j.contains("stream") ? integer(j, "stream", w) : 0;
    if (stream < 0 || stream > std::numeric_limits<std::uint32_t>::max()) {
      fail(ErrorCode::ConfigError, "rule.stream out of range");
    }
    const auto id = static_cast<std::uint32_t>(stream);
    if (type == "tail") return TimeRule::independent_time(tail_model_from_json(law), id);
    if (type == "spacing") return TimeRule::independent_time(spacing_from_json(law), id);
    fail(ErrorCode::ConfigError, "rule.law.type must be 'tail' or 'spacing'");
  }
  if (kind == "min_of") {
    check_keys(j, {"kind", "a", "b"}, w);
    return TimeRule::min_of(rule_from_json(field(j, "a", w)), rule_from_json(field(j, "b", w)));
  }
  fail(ErrorCode::ConfigError, "unknown rule kind '" + kind + "'");
}

ExperimentConfig config_from_json(const Json& j) {
  const std::string w = "config";
  check_keys(j, {"process", "rule", "x_grid", "n_reps", "master_seed", "caps", "forms", "output",
                 "regime_floor"},
             w);
  ExperimentConfig c{process_from_json(field(j, "process", w)), rule_from_json(field(j, "rule", w))};

  const Json& grid = field(j, "x_grid", w);
  if (!grid.is_array()) fail(ErrorCode::ConfigError, "x_grid: expected an array");
  for (const auto& v : grid) {
    if (!v.is_number()) fail(ErrorCode::ConfigError, "x_grid: expected numbers");
    c.x_grid.push_back(v.get<double>());
  }
  c.n_reps = integer(j, "n_reps", w);
  const Json& seed = field(j, "master_seed", w);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    fail(ErrorCode::ConfigError, "master_seed: expected a nonnegative 64-bit integer");
  }
  c.master_seed = seed.get<std::uint64_t>();
  if (j.contains("caps")) {
    const Json& caps = j.at("caps");
    check_keys(caps, {"max_jumps", "max_time"}, "caps");
    if (caps.contains("max_jumps")) c.caps.max_jumps = integer(caps, "max_jumps", "caps");
    if (caps.contains("max_time") && !caps.at("max_time").is_null()) {
      c.caps.max_time = number(caps, "max_time", "caps");
    }
  }
  if (j.contains("forms")) {
    const Json& forms = j.at("forms");
    if (!forms.is_array()) fail(ErrorCode::ConfigError, "forms: expected an array");
    for (const auto& f : forms) {
      if (!f.is_string()) fail(ErrorCode::ConfigError, "forms: expected strings");
      c.forms.push_back(form_from_string(f.get<std::string>()));
    }
  }
  if (j.contains("output")) c.output = text(j, "output", w);
  if (j.contains("regime_floor")) c.regime_floor = number(j, "regime_floor", w);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  require(!x_grid.empty(), ErrorCode::ConfigError, "x_grid must not be empty");
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    require(std::isfinite(x_grid[i]), ErrorCode::ConfigError, "x_grid values must be finite");
    require(i == 0 || x_grid[i] > x_grid[i - 1], ErrorCode::ConfigError,
            "x_grid must be strictly increasing");
  }
  require(n_reps >= 1, ErrorCode::ConfigError, "n_reps must be >= 1");
  require(caps.max_jumps > 0 && caps.max_time > 0.0, ErrorCode::ConfigError,
          "caps must be positive");
  require(regime_floor >= 0.0, ErrorCode::ConfigError, "regime_floor must be >= 0");
  const std::set<Form> unique(forms.begin(), forms.end());
  require(unique.size() == forms.size(), ErrorCode::ConfigError, "forms must not repeat");
}

ExperimentConfig parse_config(const std::string& content) {
  Json j;
  try {
    j = Json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::ConfigError, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Monte Carlo harness

namespace {

constexpr std::int64_t kBlock = 1 << 14;

struct BlockTally {
  std::vector<std::int64_t> hit_bump;
  std::vector<std::int64_t> censor_bump;
  std::int64_t censored = 0;
  std::exception_ptr error;
};

// Index of the first grid point >= m: M > x holds exactly for the points before it.
std::size_t settled_count(const std::vector<double>& grid, double m) {
  return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), m) - grid.begin());
}

}  // namespace

McResult mc_tail_estimate(const ExperimentConfig& config, int workers) {
  config.validate();
  require(workers >= 1, ErrorCode::InvalidArgument, "workers must be >= 1");
  const std::int64_t n = config.n_reps;
  const std::size_t k = config.x_grid.size();
  const std::int64_t n_blocks = (n + kBlock - 1) / kBlock;

  McResult res;
  res.n_tau.assign(static_cast<std::size_t>(n), 0);
  res.tau.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<BlockTally> tallies(static_cast<std::size_t>(n_blocks));
  std::atomic<std::int64_t> next{0};

  auto work = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      BlockTally& t = tallies[static_cast<std::size_t>(b)];
      t.hit_bump.assign(k + 1, 0);
      t.censor_bump.assign(k + 1, 0);
      try {
        const std::int64_t end = std::min(n, (b + 1) * kBlock);
        for (std::int64_t i = b * kBlock; i < end; ++i) {
          const RunOutcome out = simulate_replicate(config.process, config.rule, config.master_seed,
                                                    static_cast<std::uint64_t>(i), config.caps);
          res.n_tau[static_cast<std::size_t>(i)] = out.sample.n_tau;
          res.tau[static_cast<std::size_t>(i)] = out.sample.tau;
          const std::size_t settled = settled_count(config.x_grid, out.sample.m_tau);
          ++t.hit_bump[0];
          --t.hit_bump[settled];
          if (out.censored) {
            ++t.censored;
            ++t.censor_bump[settled];
          }
        }
      } catch (...) {
        t.error = std::current_exception();
      }
    }
  };

  const int threads = static_cast<int>(std::min<std::int64_t>(workers, n_blocks));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<std::int64_t> hit_bump(k + 1, 0), censor_bump(k + 1, 0);
  for (const auto& t : tallies) {
    if (t.error) std::rethrow_exception(t.error);
    for (std::size_t i = 0; i <= k; ++i) {
      hit_bump[i] += t.hit_bump[i];
      censor_bump[i] += t.censor_bump[i];
    }
    res.censored_total += t.censored;
  }
  if (static_cast<double>(res.censored_total) > kMaxCensoredFraction * static_cast<double>(n)) {
    fail(ErrorCode::CapExceeded, std::to_string(res.censored_total) + " of " + std::to_string(n) +
                                     " replicates reached the caps before tau");
  }

  std::int64_t hits = 0, censored = 0;
  for (std::size_t i = 0; i < k; ++i) {
    hits += hit_bump[i];
    censored += censor_bump[i];
    TailEstimate row;
    row.x = config.x_grid[i];
    row.hits = hits;
    row.n_reps = n;
    row.censored = censored;
    row.p_hat = static_cast<double>(hits) / static_cast<double>(n);
    const Interval ci = wilson_interval(hits, n);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    res.rows.push_back(row);
  }
  return res;
}

bool form_applicable(Form form, const ProcessSpec& spec, const TimeRule& rule) {
  const ProcessKind k = spec.kind();
  const bool renewal = k == ProcessKind::RandomWalk || k == ProcessKind::CompoundRenewal ||
                       k == ProcessKind::CompoundPoisson;
  switch (form) {
    case Form::CRP_NTau: return renewal;
    case Form::FixedTime_ENt: return renewal && rule.deterministic();
    case Form::RW_Tau: return k == ProcessKind::RandomWalk;
    case Form::Poisson_NTau:
    case Form::Poisson_LambdaTau:
    case Form::Poisson_X1Tail: return k == ProcessKind::CompoundPoisson && spec.jump().heavy_tailed();
    case Form::Levy_X1Tail: return spec.levy_type() && spec.jump().heavy_tailed();
  }
  return false;
}

std::vector<Form> applicable_forms(const ProcessSpec& spec, const TimeRule& rule) {
  std::vector<Form> out;
  for (Form f : all_forms()) {
    if (form_applicable(f, spec, rule)) out.push_back(f);
  }
  return out;
}

double expected_jumps(const ProcessSpec& spec, const TimeRule& rule,
                      const std::vector<std::int64_t>& n_tau) {
  require(rule.deterministic(), ErrorCode::FormMismatch,
          "E N_t needs a FixedTime or FixedJumpCount rule");
  if (rule.kind() == RuleKind::FixedJumpCount) return static_cast<double>(rule.count());
  const double t = rule.time();
  const SpacingModel& sp = spec.spacing();
  if (const auto* d = std::get_if<spacing::Deterministic>(&sp.family())) {
    return std::floor(t / d->period);
  }
  if (const auto* e = std::get_if<spacing::Exponential>(&sp.family())) return e->rate * t;
  require(!n_tau.empty(), ErrorCode::EmptySamples, "E N_t needs replicate samples");
  RunningStats s;
  for (auto v : n_tau) s.push(static_cast<double>(v));
  return s.mean();
}

ApproxResult evaluate_form(Form form, double x, const ExperimentConfig& config, const McResult& run) {
  const ProcessSpec& spec = config.process;
  require(form_applicable(form, spec, config.rule), ErrorCode::FormMismatch,
          to_string(form) + " does not apply to " + spec.describe() + " with " +
              config.rule.describe());
  switch (form) {
    case Form::CRP_NTau: return approx_crp(x, run.n_tau, spec.a(), spec.jump());
    case Form::FixedTime_ENt:
      return approx_fixed_time(x, expected_jumps(spec, config.rule, run.n_tau), spec.a(), spec.jump());
    case Form::RW_Tau: return approx_rw(x, run.n_tau, spec.a(), spec.jump());
    case Form::Poisson_NTau:
      return approx_poisson(x, HorizonSamples::jump_counts(run.n_tau), spec.a(), spec.jump_rate(),
                            spec.jump(), form);
    case Form::Poisson_LambdaTau:
    case Form::Poisson_X1Tail:
      return approx_poisson(x, HorizonSamples::times(run.tau), spec.a(), spec.jump_rate(),
                            spec.jump(), form);
    case Form::Levy_X1Tail: return approx_levy(x, run.tau, spec.m(), spec.jump_rate(), spec.jump());
  }
  fail(ErrorCode::FormMismatch, "unknown form");
}

std::vector<Form> resolve_forms(const ExperimentConfig& config) {
  if (config.forms.empty()) {
    auto forms = applicable_forms(config.process, config.rule);
    require(!forms.empty(), ErrorCode::FormMismatch,
            "no approximation form applies to " + config.process.describe());
    return forms;
  }
  for (Form f : config.forms) {
    require(form_applicable(f, config.process, config.rule), ErrorCode::FormMismatch,
            to_string(f) + " does not apply to " + config.process.describe() + " with " +
                config.rule.describe());
  }
  return config.forms;
}

namespace {

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::numeric_limits<double>::infinity();
}

}  // namespace

Comparison compare(const ExperimentConfig& config, int workers) {
  Comparison c;
  c.forms = resolve_forms(config);
  c.run = mc_tail_estimate(config, workers);
  const TailModel& jump = config.process.jump();
  for (Form f : c.forms) {
    FormSummary s;
    s.form = f;
    for (auto& row : c.run.rows) {
      const ApproxResult r = evaluate_form(f, row.x, config, c.run);
      FormColumn col;
      col.form = f;
      col.approx = r.value;
      col.approx_se = r.std_error;
      col.ratio = safe_ratio(row.p_hat, r.value);
      col.in_regime = r.value >= config.regime_floor * jump.tail_bar(row.x);
      row.forms.push_back(col);
      if (!col.in_regime) ++s.rows_outside_regime;
    }
    const TailEstimate& last = c.run.rows.back();
    const FormColumn& col = last.forms.back();
    s.x = last.x;
    s.ratio = col.ratio;
    s.band_lo = safe_ratio(last.ci_lo, col.approx);
    s.band_hi = safe_ratio(last.ci_hi, col.approx);
    s.in_regime = col.in_regime;
    c.summary.push_back(s);
  }
  return c;
}

std::string tail_csv(const std::vector<TailEstimate>& rows, const std::vector<Form>& forms) {
  std::string out = "x,hits,n_reps,p_hat,ci_lo,ci_hi,censored";
  for (Form f : forms) out += "," + to_string(f) + "_approx," + to_string(f) + "_ratio";
  out += '\n';
  for (const auto& r : rows) {
    out += format_double(r.x) + ',' + std::to_string(r.hits) + ',' + std::to_string(r.n_reps) + ',' +
           format_double(r.p_hat) + ',' + format_double(r.ci_lo) + ',' + format_double(r.ci_hi) +
           ',' + std::to_string(r.censored);
    for (Form f : forms) {
      const auto it = std::find_if(r.forms.begin(), r.forms.end(),
                                   [f](const FormColumn& c) { return c.form == f; });
      require(it != r.forms.end(), ErrorCode::FormMismatch, "row lacks form " + to_string(f));
      out += ',' + format_double(it->approx) + ',' + format_double(it->ratio);
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const FormSummary& s) {
  Json j;
  j["form"] = to_string(s.form);
  j["x"] = s.x;
  j["ratio"] = finite_or_null(s.ratio);
  j["band_lo"] = finite_or_null(s.band_lo);
  j["band_hi"] = finite_or_null(s.band_hi);
  j["in_regime"] = s.in_regime;
  j["rows_outside_regime"] = s.rows_outside_regime;
  return j.dump();
}

std::string approx_csv(const ExperimentConfig& config, int workers) {
  const std::vector<Form> forms = resolve_forms(config);
  const McResult run = mc_tail_estimate(config, workers);
  std::string out = "x";
  for (Form f : forms) out += "," + to_string(f) + "_approx," + to_string(f) + "_se";
  out += '\n';
  for (double x : config.x_grid) {
    out += format_double(x);
    for (Form f : forms) {
      const ApproxResult r = evaluate_form(f, x, config, run);
      out += ',' + format_double(r.value) + ',' + format_double(r.std_error);
    }
    out += '\n';
  }
  return out;
}

int resolve_workers(std::optional<int> flag) {
  if (flag) {
    require(*flag >= 1, ErrorCode::InvalidArgument, "--workers must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("HTM_DEFAULT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    fail(ErrorCode::ConfigError, "HTM_DEFAULT_WORKERS must be a positive integer");
  }
  return 1;
}

}  // namespace htm
