#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "htm/error.hpp"
#include "htm/experiments.hpp"
#include "htm/selftest.hpp"
#include "htm/stats.hpp"

using namespace htm;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("did not throw");
  return ErrorCode::InvalidArgument;
}

const char* kConfig = R"({
  "process": {"kind": "compound_poisson", "c": -0.5, "rate": 2.0,
              "jump": {"family": "pareto", "alpha": 2.0, "xm": 1.0, "shift": 2.0}},
  "rule": {"kind": "min_of",
           "a": {"kind": "first_passage_below", "level": -5.0},
           "b": {"kind": "independent_time", "law": {"type": "spacing", "family": "exponential", "rate": 0.2}, "stream": 0}},
  "x_grid": [1.0, 5.0, 25.0],
  "n_reps": 4000,
  "master_seed": 11,
  "caps": {"max_jumps": 1000000, "max_time": null},
  "forms": [],
  "output": ""
})";

std::vector<std::string> rule_jsons() {
  return {R"({"kind": "fixed_time", "t": 2.5})",
          R"({"kind": "fixed_jump_count", "n": 4})",
          R"({"kind": "first_passage_below", "level": -3})",
          R"({"kind": "first_exceedance_of_jump_sum", "threshold": 2})",
          R"({"kind": "independent_time", "law": {"type": "tail", "family": "weibull", "shape": 0.5, "scale": 2, "shift": 0}, "stream": 2})",
          R"({"kind": "min_of", "a": {"kind": "fixed_time", "t": 1}, "b": {"kind": "independent_time", "law": {"type": "spacing", "family": "uniform", "lo": 1, "hi": 2}, "stream": 0}})"};
}

std::vector<std::string> process_jsons() {
  return {R"({"kind": "random_walk", "jump": {"family": "lognormal", "mu": 0, "sigma": 0.5, "shift": 2.1331}})",
          R"({"kind": "compound_renewal", "c": -0.5, "spacing": {"family": "deterministic", "period": 1}, "jump": {"family": "weibull", "shape": 0.5, "scale": 1, "shift": 2.5}})",
          R"({"kind": "compound_renewal", "c": 0, "spacing": {"family": "uniform", "lo": 0.5, "hi": 1.5}, "jump": {"family": "exponential", "rate": 1, "shift": 2}})",
          R"({"kind": "compound_poisson", "c": 0, "rate": 1, "jump": {"family": "two_point", "p": 0.4, "up": 1, "down": -1, "shift": 0}})",
          R"({"kind": "levy", "drift": -2, "sigma": 0.5, "rate": 1, "jump": {"family": "pareto", "alpha": 5, "xm": 1, "shift": 0}})",
          R"({"kind": "random_walk", "jump": {"family": "degenerate", "value": -1}})"};
}

std::string with(const std::string& process, const std::string& rule) {
  return R"({"process": )" + process + R"(, "rule": )" + rule +
         R"(, "x_grid": [0.5, 2], "n_reps": 100, "master_seed": 18446744073709551615, "regime_floor": 0.2})";
}

}  // namespace

TEST_CASE("config round trip") {
  for (const auto& p : process_jsons()) {
    for (const auto& r : rule_jsons()) {
      CAPTURE(p);
      CAPTURE(r);
      const ExperimentConfig c = parse_config(with(p, r));
      const std::string once = serialize(c);
      const ExperimentConfig again = parse_config(once);
      CHECK(serialize(again) == once);
      CHECK(again.master_seed == 18446744073709551615ull);
      CHECK(again.regime_floor == 0.2);
    }
  }
  const ExperimentConfig c = parse_config(kConfig);
  CHECK(c.rule.kind() == RuleKind::MinOf);
  CHECK(std::isinf(c.caps.max_time));
  CHECK(serialize(parse_config(serialize(c))) == serialize(c));
}

TEST_CASE("config rejects unknown keys and bad values") {
  const std::string p = process_jsons()[0];
  const std::string r = rule_jsons()[0];
  auto bad = [](const std::string& text) { return code_of([&] { parse_config(text); }); };
  CHECK(bad(R"({"process": )" + p + R"(, "rule": )" + r + R"(, "x_grid": [1], "n_reps": 1, "master_seed": 1, "extra": 1})") ==
        ErrorCode::ConfigError);
  CHECK(bad(with(R"({"kind": "random_walk", "jump": {"family": "pareto", "alpha": 2, "xm": 1, "shift": 3, "colour": 1}})", r)) ==
        ErrorCode::ConfigError);
  CHECK(bad(with(p, R"({"kind": "fixed_time", "t": 1, "when": 2})")) == ErrorCode::ConfigError);
  CHECK(bad(with(p, R"({"kind": "sometime"})")) == ErrorCode::ConfigError);
  CHECK(bad(with(p, R"({"kind": "fixed_time", "t": "soon"})")) == ErrorCode::ConfigError);
  CHECK(bad(R"({"process": )" + p + R"(, "rule": )" + r + R"(, "x_grid": [2, 1], "n_reps": 1, "master_seed": 1})") ==
        ErrorCode::ConfigError);
  CHECK(bad(R"({"process": )" + p + R"(, "rule": )" + r + R"(, "x_grid": [1], "n_reps": 1, "master_seed": -1})") ==
        ErrorCode::ConfigError);
  CHECK(bad(R"({"process": )" + p + R"(, "rule": )" + r + R"(, "x_grid": [1], "n_reps": 1, "master_seed": 1, "forms": ["Bogus"]})") ==
        ErrorCode::ConfigError);
  CHECK(bad("{not json") == ErrorCode::ConfigError);
  CHECK(bad(with(R"({"kind": "random_walk", "jump": {"family": "pareto", "alpha": 2, "xm": 1, "shift": 1}})", r)) ==
        ErrorCode::InvalidModel);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::ConfigError);
}

TEST_CASE("exhaustive enumeration of a two-point walk") {
  const double p = 0.4;
  const int n = 4;
  const std::vector<double> grid{0.5, 1.5, 2.5, 3.5};
  std::vector<double> exact(grid.size(), 0.0);
  for (int mask = 0; mask < (1 << n); ++mask) {
    double x = 0.0, m = 0.0, prob = 1.0;
    for (int i = 0; i < n; ++i) {
      const bool up = (mask >> i) & 1;
      x += up ? 1.0 : -1.0;
      prob *= up ? p : 1.0 - p;
      m = std::max(m, x);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) exact[k] += m > grid[k] ? prob : 0.0;
  }
  ExperimentConfig c{ProcessSpec::random_walk(TailModel::two_point(p, 1.0, -1.0)),
                     TimeRule::fixed_jump_count(n), grid, 200'000, 5};
  const McResult r = mc_tail_estimate(c);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double se = std::sqrt(exact[k] * (1 - exact[k]) / c.n_reps);
    CAPTURE(grid[k]);
    CHECK(std::abs(r.rows[k].p_hat - exact[k]) <= 4.0 * se);
  }
}

TEST_CASE("tail rows: Wilson interval, monotone hits") {
  const ExperimentConfig c = parse_config(kConfig);
  const McResult r = mc_tail_estimate(c);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.tau.size() == 4000);
  CHECK(r.n_tau.size() == 4000);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& row = r.rows[k];
    const double n = row.n_reps, ph = static_cast<double>(row.hits) / n, z = 1.959963984540054;
    const double centre = (ph + z * z / (2 * n)) / (1 + z * z / n);
    const double half = z / (1 + z * z / n) * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
    CHECK(row.p_hat == ph);
    CHECK(row.ci_lo == doctest::Approx(centre - half).epsilon(1e-12));
    CHECK(row.ci_hi == doctest::Approx(centre + half).epsilon(1e-12));
    if (k > 0) CHECK(row.hits <= r.rows[k - 1].hits);
  }
  const Interval zero = wilson_interval(0, 100);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig c = parse_config(kConfig);
  c.n_reps = 40'000;
  const auto one = compare(c, 1);
  for (int w : {2, 3, 8}) {
    const auto many = compare(c, w);
    CHECK(tail_csv(many.run.rows, many.forms) == tail_csv(one.run.rows, one.forms));
  }
  CHECK(approx_csv(c, 1) == approx_csv(c, 4));
}

TEST_CASE("different seeds give different estimates") {
  ExperimentConfig c = parse_config(kConfig);
  const std::string a = tail_csv(mc_tail_estimate(c).rows, {});
  c.master_seed = 12;
  CHECK(tail_csv(mc_tail_estimate(c).rows, {}) != a);
}

TEST_CASE("censoring beyond the limit is an error") {
  ExperimentConfig c{ProcessSpec::random_walk(TailModel::pareto(2.0, 1.0, 3.0)),
                     TimeRule::first_passage_below(-1e9), {1.0}, 100, 1, Caps{50, 1e300}};
  CHECK(code_of([&] { mc_tail_estimate(c); }) == ErrorCode::CapExceeded);
  ExperimentConfig t{ProcessSpec::compound_poisson(-1.0, 1.0, TailModel::pareto(2.0, 1.0, 3.0)),
                     TimeRule::fixed_time(5.0), {1.0}, 100, 1, Caps{1'000'000, 4.0}};
  CHECK(code_of([&] { mc_tail_estimate(t); }) == ErrorCode::CapExceeded);
  t.caps.max_time = 1e9;
  CHECK(mc_tail_estimate(t).censored_total == 0);
}

TEST_CASE("form applicability and expected jumps") {
  const ProcessSpec rw = ProcessSpec::random_walk(TailModel::pareto(2.0, 1.0, 3.0));
  const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 2.0, TailModel::pareto(2.0, 1.0, 3.0));
  const ProcessSpec lcp = ProcessSpec::compound_poisson(0.0, 2.0, TailModel::exponential(1.0, 2.0));
  const ProcessSpec lv = ProcessSpec::levy(-3.0, 0.5, 1.0, TailModel::pareto(2.0, 1.0));
  const TimeRule ft = TimeRule::fixed_time(3.0);
  const TimeRule fp = TimeRule::first_passage_below(-2.0);
  CHECK(form_applicable(Form::RW_Tau, rw, fp));
  CHECK(!form_applicable(Form::RW_Tau, cp, fp));
  CHECK(form_applicable(Form::FixedTime_ENt, rw, ft));
  CHECK(!form_applicable(Form::FixedTime_ENt, rw, fp));
  CHECK(form_applicable(Form::Poisson_LambdaTau, cp, fp));
  CHECK(!form_applicable(Form::Poisson_LambdaTau, lcp, fp));
  CHECK(!form_applicable(Form::Poisson_LambdaTau, lv, fp));
  CHECK(form_applicable(Form::Levy_X1Tail, lv, fp));
  CHECK(form_applicable(Form::Levy_X1Tail, cp, fp));
  CHECK(!form_applicable(Form::CRP_NTau, lv, fp));
  CHECK(applicable_forms(lv, fp) == std::vector<Form>{Form::Levy_X1Tail});

  CHECK(expected_jumps(rw, TimeRule::fixed_jump_count(6), {}) == 6.0);
  CHECK(expected_jumps(rw, TimeRule::fixed_time(3.7), {}) == 3.0);
  CHECK(expected_jumps(cp, ft, {}) == 6.0);
  CHECK_THROWS_AS(expected_jumps(cp, fp, {1, 2, 6}), Error);

  ExperimentConfig c{lcp, fp, {1.0}, 10, 1};
  CHECK(resolve_forms(c) == std::vector<Form>{Form::CRP_NTau});
  ExperimentConfig d{cp, fp, {1.0}, 10, 1};
  d.forms = {Form::RW_Tau};
  CHECK(code_of([&] { resolve_forms(d); }) == ErrorCode::FormMismatch);
}

TEST_CASE("output formats") {
  ExperimentConfig c = parse_config(kConfig);
  const Comparison res = compare(c, 1);
  const std::string csv = tail_csv(res.run.rows, res.forms);
  std::string header = "x,hits,n_reps,p_hat,ci_lo,ci_hi,censored";
  for (Form f : res.forms) header += "," + std::string(to_string(f)) + "_approx," + std::string(to_string(f)) + "_ratio";
  CHECK(csv.rfind(header + "\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  REQUIRE(!res.summary.empty());
  const auto j = nlohmann::json::parse(summary_json(res.summary[0]));
  CHECK(j.contains("ratio"));

  FormSummary s;
  s.ratio = std::numeric_limits<double>::quiet_NaN();
  CHECK(nlohmann::json::parse(summary_json(s))["ratio"].is_null());
}

TEST_CASE("worker count resolution") {
  CHECK(resolve_workers(3) == 3);
  ::setenv("HTM_DEFAULT_WORKERS", "5", 1);
  CHECK(resolve_workers(std::nullopt) == 5);
  ::unsetenv("HTM_DEFAULT_WORKERS");
  CHECK(resolve_workers(std::nullopt) == 1);
}

TEST_CASE("worked-example fixture suite") {
  for (const auto& c : run_selftest()) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.pass);
  }
}

TEST_CASE("ratios from disjoint seed halves agree within their intervals") {
  const TailModel j = TailModel::pareto(1.5, 1.0, 4.0);
  ExperimentConfig c{ProcessSpec::random_walk(j), TimeRule::fixed_jump_count(100), {200.0, 400.0}, 100'000, 1};
  c.forms = {Form::FixedTime_ENt};
  const Comparison a = compare(c, 1);
  c.master_seed = 2;
  const Comparison b = compare(c, 1);
  for (std::size_t k = 0; k < c.x_grid.size(); ++k) {
    const auto& ra = a.run.rows[k];
    const auto& rb = b.run.rows[k];
    CAPTURE(ra.x);
    CHECK(ra.forms[0].approx == rb.forms[0].approx);
    CHECK(ra.ci_lo <= rb.ci_hi);
    CHECK(rb.ci_lo <= ra.ci_hi);
  }
}

TEST_CASE("censoring accounting") {
  ExperimentConfig c{ProcessSpec::compound_poisson(-1.0, 1.0, TailModel::pareto(2.0, 1.0, 2.0)),
                     TimeRule::independent_time(TailModel::pareto(2.0, 1.0)), {0.5, 2.0, 8.0, 32.0}, 100'000, 3,
                     Caps{10'000'000, 100.0}};
  const McResult r = mc_tail_estimate(c);
  CHECK(r.censored_total > 0);
  CHECK(r.censored_total <= static_cast<std::int64_t>(kMaxCensoredFraction * c.n_reps));
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& row = r.rows[k];
    CHECK(row.hits + row.censored <= row.n_reps);
    CHECK(row.censored <= r.censored_total);
    CHECK(row.p_hat == static_cast<double>(row.hits) / static_cast<double>(row.n_reps));
    if (k > 0) {
      CHECK(row.censored >= r.rows[k - 1].censored);
      CHECK(row.hits + row.censored <= r.rows[k - 1].hits + r.rows[k - 1].censored);
    }
  }
}
