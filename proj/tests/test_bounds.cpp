#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>

#include "json.hpp"

#include "htm/bounds.hpp"
#include "htm/error.hpp"

using namespace htm;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("did not throw");
  return ErrorCode::ConfigError;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("number and field formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("report serialization") {
  ValidationReport r;
  r.name = "demo";
  r.inputs = {{"family", "pareto"}};
  r.rows = {{"x", 1.0, 2.0, 3.0, 2.0 / 3.0, 0.5}, {"y,z", 2.0, 1.0, 1.0, 1.0, 0.0}};
  r.pass = true;
  r.reason = "ok";
  r.seed = 9;
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("label,point,lhs,rhs,ratio,stat\n", 0) == 0);
  CHECK(count_lines(csv) == 3);
  CHECK(csv.find("\"y,z\"") != std::string::npos);
  const auto j = nlohmann::json::parse(r.verdict_json());
  CHECK(j["name"] == "demo");
  CHECK(j["rows"] == 2);
  CHECK(j["seed"] == 9);
  CHECK(j["inputs"]["family"] == "pareto");
}

TEST_CASE("strong subexponential band") {
  for (const auto& m : {TailModel::pareto(1.5, 1.0), TailModel::pareto(2.0, 1.0),
                        TailModel::weibull(0.5, 10.0), TailModel::lognormal(0.0, 1.0)}) {
    CAPTURE(m.family_name());
    const ValidationReport r = validate_sstar(m, default_sstar_grid());
    CHECK(r.pass);
    CHECK(r.rows.size() == 5);
    for (const auto& row : r.rows) CHECK(row.ratio == doctest::Approx(row.lhs / row.rhs).epsilon(1e-12));
  }
  const ValidationReport e = validate_sstar(TailModel::exponential(1.0), {10, 20, 40, 80, 160});
  CHECK(!e.pass);
  CHECK(e.rows.back().ratio == doctest::Approx(80.0).epsilon(1e-6));
  CHECK(code_of([] { validate_sstar(TailModel::degenerate(1.0), default_sstar_grid()); }) == ErrorCode::InvalidModel);
  CHECK(code_of([] { validate_sstar(TailModel::two_point(0.5, 1, -1), default_sstar_grid()); }) ==
        ErrorCode::InvalidModel);
  CHECK_THROWS_AS(validate_sstar(TailModel::pareto(2.0, 1.0), {10, 5}), Error);
}

TEST_CASE("horizon tail") {
  const TailModel p = TailModel::pareto(2.0, 1.0);
  const auto g = horizon_tail(p, {3.0}, 1.0);
  for (double x : {0.0, 1.0, 10.0, 100.0}) {
    CHECK(g(x) == doctest::Approx(std::min(1.0, p.integrated_tail(x) - p.integrated_tail(x + 3.0))));
  }
  const auto z = horizon_tail(p, {0.0, 0.0}, 1.0);
  CHECK(z(5.0) == 0.0);
  const auto two = horizon_tail(p, {2.0, 6.0}, 2.0);
  CHECK(two(20.0) == doctest::Approx(0.25 * ((1.0 / 20 - 1.0 / 24) + (1.0 / 20 - 1.0 / 32))));
}

TEST_CASE("Kesten validation") {
  KestenValidationOptions o;
  o.step = 0.5;
  o.cutoff = 1e-7;
  o.horizon_draws = 200;
  const TailModel p = TailModel::pareto(2.0, 1.0);
  const ValidationReport r = validate_kesten(p, SpacingModel::exponential(1.0), 0.5, 6, o);
  CHECK(r.pass);
  CHECK(r.rows.size() == 6);
  double c_hat = 0.0;
  for (const auto& row : r.rows) {
    CHECK(row.ratio == doctest::Approx(row.lhs / row.rhs).epsilon(1e-12));
    CHECK(row.stat < 1e-6);
    c_hat = std::max(c_hat, row.ratio);
  }
  CHECK(std::isfinite(c_hat));
  const ValidationReport again = validate_kesten(p, SpacingModel::exponential(1.0), 0.5, 6, o);
  CHECK(again.to_csv() == r.to_csv());
  CHECK_THROWS_AS(validate_kesten(p, SpacingModel::exponential(1.0), 0.5, 13, o), Error);
  CHECK_THROWS_AS(validate_kesten(p, SpacingModel::exponential(1.0), 0.5, 0, o), Error);
}

TEST_CASE("Wald validation") {
  const ProcessSpec cp = ProcessSpec::compound_poisson(-0.5, 2.0, TailModel::pareto(5.0, 1.0, 1.5));
  const ValidationReport r = validate_wald(cp, TimeRule::fixed_time(5.0), 20'000, 3);
  CHECK(r.pass);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].label == "first");
  CHECK(std::abs(r.rows[0].stat) <= 4.0);
  CHECK(validate_wald(cp, TimeRule::fixed_time(5.0), 20'000, 3).to_csv() == r.to_csv());
  // Any z bound of zero rejects a noisy identity.
  CHECK(!validate_wald(cp, TimeRule::fixed_time(5.0), 20'000, 3, Caps{}, 0.0).pass);
}

TEST_CASE("uniform bound over random times") {
  const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 1.0, TailModel::degenerate(-1.0));
  LemmaSupOptions o;
  o.n_reps = 200;
  o.sup_horizon = 50;
  const auto r = validate_lemma_sup(cp, 0.1, {TimeRule::fixed_time(0.0), TimeRule::fixed_time(4.0)}, o);
  CHECK(r.pass);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].label == "sup");
  CHECK(r.rows[1].lhs == 0.0);
  CHECK(std::abs(r.rows[2].lhs + 0.4) <= 4.0 * r.rows[2].stat);
  CHECK(code_of([&] { validate_lemma_sup(cp, 0.0, {TimeRule::fixed_time(1.0)}, o); }) ==
        ErrorCode::InvalidArgument);
  CHECK_THROWS_AS(validate_lemma_sup(ProcessSpec::random_walk(TailModel::degenerate(-1.0)), 0.1,
                                     {TimeRule::fixed_time(1.0)}, o),
                  Error);
}

TEST_CASE("bounded-horizon equivalence") {
  const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 1.0, TailModel::pareto(2.0, 1.0, 3.0));
  StoppingTOptions o;
  o.n_reps = 20'000;
  const auto r = validate_stopping_T(cp, {TimeRule::first_passage_below(-3.0)}, 10.0, {100.0, 1000.0, 10000.0}, o);
  CHECK(r.pass);
  for (const auto& row : r.rows) {
    if (row.point == 10000.0) CHECK(row.ratio == doctest::Approx(1.0).epsilon(0.2));
  }
}
