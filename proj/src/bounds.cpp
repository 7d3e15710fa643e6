#include "htm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "htm/asymptotics.hpp"
#include "htm/error.hpp"
#include "htm/stats.hpp"

namespace htm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string ValidationReport::to_csv() const {
  std::string out = "label,point,lhs,rhs,ratio,stat\n";
  for (const auto& r : rows) {
    out += csv_field(r.label);
    for (double v : {r.point, r.lhs, r.rhs, r.ratio, r.stat}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string ValidationReport::verdict_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [k, v] : inputs) in[k] = v;
  j["inputs"] = in;
  j["rows"] = rows.size();
  j["verdict"] = pass ? "pass" : "fail";
  j["reason"] = reason;
  j["seed"] = seed;
  return j.dump();
}

// ---------------------------------------------------------------------------

std::vector<double> default_sstar_grid() { return {1e2, 1e3, 1e4, 1e5, 1e6}; }

ValidationReport validate_sstar(const TailModel& model, const std::vector<double>& x_grid,
                                const SstarBand& band) {
  const bool atomic = std::holds_alternative<law::Degenerate>(model.family()) ||
                      std::holds_alternative<law::TwoPoint>(model.family());
  require(!atomic, ErrorCode::InvalidModel,
          "validate_sstar: " + model.family_name() + " has no tail to test");
  require(!x_grid.empty(), ErrorCode::InvalidArgument, "validate_sstar: empty grid");
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    require(x_grid[i] > x_grid[i - 1], ErrorCode::InvalidArgument,
            "validate_sstar: grid must be increasing");
  }

  ValidationReport rep;
  rep.name = "sstar";
  rep.inputs = {{"model", model.family_name()},
                {"shift", format_double(model.shift())},
                {"band_lo", format_double(band.lo)},
                {"band_hi", format_double(band.hi)}};
  for (double x : x_grid) {
    const double r = sstar_ratio(model, x);
    const double rhs = 2.0 * model.a_plus() * model.tail_bar(x);
    rep.rows.push_back({"x", x, r * rhs, rhs, r, std::abs(r - 1.0)});
  }
  const double last = rep.rows.back().ratio;
  const bool in_band = last >= band.lo && last <= band.hi;
  bool approaching = true;
  if (rep.rows.size() >= 2) {
    approaching = std::abs(last - 1.0) <= std::abs(rep.rows[rep.rows.size() - 2].ratio - 1.0);
  }
  rep.pass = in_band && approaching;
  std::ostringstream why;
  why << "last ratio " << format_double(last) << (in_band ? " inside" : " outside") << " band"
      << (approaching ? ", approaching 1" : ", moving away from 1");
  rep.reason = why.str();
  return rep;
}

// ---------------------------------------------------------------------------

std::function<double(double)> horizon_tail(const TailModel& model, std::vector<double> horizons,
                                           double c) {
  require(c > 0.0, ErrorCode::InvalidArgument, "horizon_tail: c must be positive");
  require(!horizons.empty(), ErrorCode::EmptySamples, "horizon_tail: no horizon draws");
  std::sort(horizons.begin(), horizons.end());
  return [model, h = std::move(horizons), c](double x) {
    const double fi = model.integrated_tail(x);
    double sum = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double term = 0.0;
    for (double t : h) {
      if (t != prev) {
        term = t > 0.0 ? std::max(0.0, fi - model.integrated_tail(x + c * t)) : 0.0;
        prev = t;
      }
      sum += term;
    }
    return std::min(1.0, sum / (c * static_cast<double>(h.size())));
  };
}

ValidationReport validate_kesten(const TailModel& model, const HorizonLaw& horizon, double delta,
                                 int n_max, const KestenValidationOptions& options) {
  require(delta > 0.0, ErrorCode::InvalidArgument, "validate_kesten: delta must be positive");
  require(n_max >= 1 && n_max <= 12, ErrorCode::InvalidArgument,
          "validate_kesten: n_max must lie in [1, 12]");
  require(options.horizon_draws >= 1, ErrorCode::InvalidArgument,
          "validate_kesten: need at least one horizon draw");
  const double step = options.step > 0.0 ? options.step : 0.01 * model.a_plus();
  require(step > 0.0, ErrorCode::InvalidArgument, "validate_kesten: grid step must be positive");

  RngStream rng(stream_seed(options.seed, 0, StreamRole::IndependentBase));
  std::vector<double> draws(static_cast<std::size_t>(options.horizon_draws));
  for (auto& d : draws) d = sample_horizon(horizon, rng);

  const auto g = horizon_tail(model, std::move(draws), options.c);
  const GridTail grid = discretize_tail(g, step, options.cutoff);
  const KestenReport k = kesten_check(grid, delta, n_max, options.kesten);

  ValidationReport rep;
  rep.name = "kesten";
  rep.seed = options.seed;
  rep.inputs = {{"model", model.family_name()},
                {"shift", format_double(model.shift())},
                {"delta", format_double(delta)},
                {"n_max", std::to_string(n_max)},
                {"step", format_double(step)},
                {"c", format_double(options.c)},
                {"horizon_draws", std::to_string(options.horizon_draws)},
                {"ceiling", format_double(options.ceiling)},
                {"grid_points", std::to_string(grid.values.size())},
                {"c_hat", format_double(k.c_hat)}};
  bool bounded = true;
  double worst_defect = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    rep.rows.push_back({"n", static_cast<double>(n), k.per_n_raw[i], std::pow(1.0 + delta, n),
                        k.per_n[i], k.mass_defect[i]});
    bounded = bounded && k.per_n[i] <= k.c_hat;
    worst_defect = std::max(worst_defect, k.mass_defect[i]);
  }
  const bool finite = std::isfinite(k.c_hat);
  const bool below = k.c_hat < options.ceiling;
  const bool mass_ok = worst_defect < options.kesten.max_mass_defect;
  rep.pass = finite && below && bounded && mass_ok;
  rep.reason = "C_hat " + format_double(k.c_hat) + (below ? " below" : " not below") +
               " ceiling, worst mass defect " + format_double(worst_defect);
  return rep;
}

// ---------------------------------------------------------------------------

ValidationReport validate_wald(const ProcessSpec& spec, const TimeRule& rule, std::int64_t n_reps,
                               std::uint64_t seed, const Caps& caps, double z_max) {
  const WaldReport w = wald_check(spec, rule, n_reps, seed, caps);
  ValidationReport rep;
  rep.name = "wald";
  rep.seed = seed;
  rep.inputs = {{"process", spec.describe()},
                {"rule", rule.describe()},
                {"n_reps", std::to_string(n_reps)},
                {"identity", w.embedded ? "embedded" : "levy"},
                {"z_max", format_double(z_max)},
                {"mean_tau", format_double(w.mean_tau)},
                {"mean_n_tau", format_double(w.mean_n_tau)}};
  rep.rows.push_back({"first", 1, w.first.lhs, w.first.rhs, w.first.lhs / w.first.rhs, w.first.z});
  rep.rows.push_back(
      {"second", 2, w.second.lhs, w.second.rhs, w.second.lhs / w.second.rhs, w.second.z});
  rep.pass = std::abs(w.first.z) <= z_max && std::abs(w.second.z) <= z_max;
  rep.reason = "z-scores " + format_double(w.first.z) + " and " + format_double(w.second.z);
  return rep;
}

namespace {

ProcessSpec with_extra_drift(const ProcessSpec& spec, double extra) {
  switch (spec.kind()) {
    case ProcessKind::CompoundPoisson:
      return ProcessSpec::compound_poisson(spec.linear_drift() + extra, spec.jump_rate(),
                                           spec.jump());
    case ProcessKind::Levy:
      return ProcessSpec::levy(spec.linear_drift() + extra, spec.sigma(), spec.jump_rate(),
                               spec.jump());
    default:
      fail(ErrorCode::InvalidModel, "expected a Levy-type process");
  }
}

}  // namespace

ValidationReport validate_lemma_sup(const ProcessSpec& spec, double epsilon,
                                    const std::vector<TimeRule>& rules,
                                    const LemmaSupOptions& options) {
  require(spec.levy_type(), ErrorCode::InvalidModel,
          "validate_lemma_sup needs a compound Poisson or Levy process");
  require(epsilon > 0.0, ErrorCode::InvalidArgument, "validate_lemma_sup: epsilon must be positive");
  require(std::isfinite(spec.variance_x1()), ErrorCode::InvalidModel,
          "validate_lemma_sup needs Var X_1 < inf");
  require(options.n_reps >= 2, ErrorCode::InvalidArgument, "validate_lemma_sup: n_reps >= 2");
  require(!rules.empty(), ErrorCode::InvalidArgument, "validate_lemma_sup: empty rule set");

  const double m_signed = spec.mean_x1();
  const double slope = m_signed + epsilon;
  const double horizon = options.sup_horizon > 0.0 ? options.sup_horizon : 200.0 / epsilon;

  // Z_t = X_t - slope t has drift -eps; its running maximum over a long path
  // estimates E sup_t Z_t from below.
  const ProcessSpec z_spec = with_extra_drift(spec, -slope);
  const TimeRule long_path = TimeRule::fixed_time(horizon);
  RunningStats sup;
  for (std::int64_t i = 0; i < options.n_reps; ++i) {
    const MaxSample s = run_until(z_spec, long_path, options.seed, static_cast<std::uint64_t>(i),
                                  options.caps);
    sup.push(s.m_tau);
  }
  const double bound = sup.mean() + 3.0 * sup.std_error();

  ValidationReport rep;
  rep.name = "lemma-sup";
  rep.seed = options.seed;
  rep.inputs = {{"process", spec.describe()},
                {"epsilon", format_double(epsilon)},
                {"signed_mean_x1", format_double(m_signed)},
                {"n_reps", std::to_string(options.n_reps)},
                {"sup_horizon", format_double(horizon)}};
  rep.rows.push_back({"sup", 0.0, sup.mean(), bound, sup.mean() / bound, sup.std_error()});

  bool ok = true;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    RunningStats est;
    for (std::int64_t i = 0; i < options.n_reps; ++i) {
      // Rules use a seed stream separate from the long paths.
      const MaxSample s = run_until(spec, rules[r], options.seed ^ 0x5bd1e995u,
                                    static_cast<std::uint64_t>(i), options.caps);
      est.push(s.x_tau - slope * s.tau);
    }
    const bool below = est.mean() <= bound;
    ok = ok && below;
    rep.rows.push_back({rules[r].describe(), static_cast<double>(r + 1), est.mean(), bound,
                        est.mean() / bound, est.std_error()});
  }
  rep.pass = ok;
  rep.reason = ok ? "every estimate below the sup bound" : "an estimate exceeds the sup bound";
  return rep;
}

// ---------------------------------------------------------------------------

ValidationReport validate_stopping_T(const ProcessSpec& spec, const std::vector<TimeRule>& rules,
                                     double T, const std::vector<double>& x_grid,
                                     const StoppingTOptions& options) {
  require(spec.levy_type(), ErrorCode::InvalidModel,
          "validate_stopping_T needs a compound Poisson or Levy process");
  require(T > 0.0 && std::isfinite(T), ErrorCode::InvalidArgument,
          "validate_stopping_T: T must be positive");
  require(!x_grid.empty() && !rules.empty(), ErrorCode::InvalidArgument,
          "validate_stopping_T: empty grid or rule set");
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    require(x_grid[i] > x_grid[i - 1], ErrorCode::InvalidArgument,
            "validate_stopping_T: grid must be increasing");
  }
  const double a = spec.a();
  const double lambda = spec.jump_rate();

  ValidationReport rep;
  rep.name = "stopping-T";
  rep.seed = options.seed;
  rep.inputs = {{"process", spec.describe()},
                {"T", format_double(T)},
                {"n_reps", std::to_string(options.n_reps)},
                {"band_lo", format_double(options.band_lo)},
                {"band_hi", format_double(options.band_hi)}};

  bool ok = true;
  std::size_t checked = 0;
  for (const auto& rule : rules) {
    const TimeRule capped = TimeRule::min_of(rule, TimeRule::fixed_time(T));
    std::vector<std::int64_t> n(static_cast<std::size_t>(options.n_reps));
    std::vector<double> tau(n.size());
    RunningStats tau_stats;
    for (std::int64_t i = 0; i < options.n_reps; ++i) {
      const MaxSample s =
          run_until(spec, capped, options.seed, static_cast<std::uint64_t>(i), options.caps);
      n[static_cast<std::size_t>(i)] = s.n_tau;
      tau[static_cast<std::size_t>(i)] = s.tau;
      tau_stats.push(s.tau);
    }
    const HorizonSamples ns = HorizonSamples::jump_counts(n);
    const HorizonSamples ts = HorizonSamples::times(tau);
    const std::string name = capped.describe();
    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
      const double x = x_grid[xi];
      const double rhs = a * lambda * tau_stats.mean() * spec.jump().tail_bar(x);
      const auto fn = approx_poisson(x, ns, a, lambda, spec.jump(), Form::Poisson_NTau);
      const auto ft = approx_poisson(x, ts, a, lambda, spec.jump(), Form::Poisson_LambdaTau);
      const bool last = xi + 1 == x_grid.size();
      for (const auto& [tag, res] : {std::pair{"N_tau", fn}, std::pair{"lambda_tau", ft}}) {
        if (rhs <= 0.0) {
          rep.rows.push_back({name + " " + tag + " skipped", x, a * res.value, rhs,
                              std::numeric_limits<double>::quiet_NaN(), a * res.std_error});
          continue;
        }
        const double ratio = a * res.value / rhs;
        rep.rows.push_back({name + " " + tag, x, a * res.value, rhs, ratio, a * res.std_error});
        if (last) {
          ++checked;
          ok = ok && ratio >= options.band_lo && ratio <= options.band_hi;
        }
      }
    }
  }
  rep.pass = ok;
  rep.reason = std::to_string(checked) + " ratios checked at the largest x" +
               (ok ? ", all inside the band" : ", some outside the band");
  return rep;
}

}  // namespace htm
