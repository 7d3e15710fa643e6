#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "htm/asymptotics.hpp"
#include "htm/error.hpp"
#include "htm/rng.hpp"

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

const TailModel p2 = TailModel::pareto(2.0, 1.0);

std::vector<std::int64_t> geometric_counts(std::size_t n, double p, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<std::int64_t> v(n);
  for (auto& k : v) k = static_cast<std::int64_t>(std::floor(std::log(rng.uniform()) / std::log1p(-p)));
  return v;
}

}  // namespace

TEST_CASE("form names") {
  for (Form f : all_forms()) CHECK(form_from_string(to_string(f)) == f);
  CHECK(all_forms().size() == 7);
  CHECK(code_of([] { form_from_string("nope"); }) == ErrorCode::ConfigError);
}

TEST_CASE("closed-form worked values") {
  const std::vector<std::int64_t> zeros(10, 0);
  CHECK(approx_crp(4.0, zeros, 1.0, p2).value == 0.0);
  const std::vector<std::int64_t> v{1, 3};
  CHECK(approx_crp(4.0, v, 1.0, p2).value == doctest::Approx(0.5 * ((0.25 - 0.2) + (0.25 - 1.0 / 7.0))).epsilon(1e-15));
  const std::vector<std::int64_t> big{1'000'000'000};
  CHECK(approx_crp(4.0, big, 1.0, p2).value == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(approx_fixed_time(4.0, 0.0, 1.0, p2).value == 0.0);
  CHECK(approx_fixed_time(4.0, 4.0, 1.0, p2).value == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(approx_fixed_time(4.0, 4.0, 1.0, p2).std_error == 0.0);
  const std::vector<std::int64_t> w{1, 1'000'000};
  CHECK(approx_rw(10.0, w, 1.0, p2).value ==
        doctest::Approx(0.5 * ((0.1 - 1.0 / 11.0) + (0.1 - 1.0 / (10.0 + 1e6)))).epsilon(1e-15));
}

TEST_CASE("standard error is the sample standard error of the summands") {
  const auto n = geometric_counts(5000, 0.1, 3);
  const double a = 0.7, x = 30.0;
  std::vector<double> terms;
  for (auto k : n) terms.push_back((p2.integrated_tail(x) - p2.integrated_tail(x + a * k)) / a);
  const double mean = std::accumulate(terms.begin(), terms.end(), 0.0) / terms.size();
  double ss = 0.0;
  for (double t : terms) ss += (t - mean) * (t - mean);
  const double se = std::sqrt(ss / (terms.size() - 1) / terms.size());
  const ApproxResult r = approx_crp(x, n, a, p2);
  CHECK(r.value == doctest::Approx(mean).epsilon(1e-12));
  CHECK(r.std_error == doctest::Approx(se).epsilon(1e-9));
  CHECK(r.n_samples == 5000);
}

TEST_CASE("monotone in x and in the horizon") {
  const auto n = geometric_counts(2000, 0.05, 9);
  std::vector<std::int64_t> n2 = n;
  for (auto& k : n2) k += 3;
  double prev = std::numeric_limits<double>::infinity();
  for (double x = 0.0; x < 1e4; x = 2.0 * x + 1.0) {
    const double v = approx_crp(x, n, 1.0, p2).value;
    CHECK(v <= prev);
    CHECK(approx_crp(x, n2, 1.0, p2).value >= v);
    prev = v;
  }
}

TEST_CASE("sandwich between the tail at x and at x plus the horizon") {
  const auto n = geometric_counts(3000, 0.02, 4);
  const double a = 1.3;
  const TailModel ln = TailModel::lognormal(0.0, 1.0, 2.0);
  for (double x : {1.0, 10.0, 100.0, 1000.0}) {
    double upper = 0.0, lower = 0.0;
    for (auto k : n) {
      upper += k * ln.tail_bar(x);
      lower += k * ln.tail_bar(x + a * k);
    }
    upper /= n.size();
    lower /= n.size();
    const double v = approx_crp(x, n, a, ln).value;
    CHECK(v <= upper * (1.0 + 1e-9));
    CHECK(v >= lower * (1.0 - 1e-9));
  }
  // Bounded horizons: the ratio to E N F(x) tends to one.
  const std::vector<std::int64_t> small{1, 2, 3, 4};
  const double r = approx_crp(1e6, small, 1.0, p2).value / (2.5 * p2.tail_bar(1e6));
  CHECK(r == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("duplicating the sample leaves the value unchanged") {
  const auto n = geometric_counts(1000, 0.1, 5);
  std::vector<std::int64_t> twice = n;
  twice.insert(twice.end(), n.begin(), n.end());
  const ApproxResult a = approx_crp(20.0, n, 1.0, p2);
  const ApproxResult b = approx_crp(20.0, twice, 1.0, p2);
  CHECK(b.value == doctest::Approx(a.value).epsilon(1e-14));
  CHECK(b.std_error < a.std_error);
  std::vector<std::int64_t> shuffled = n;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(approx_crp(20.0, shuffled, 1.0, p2).value == doctest::Approx(a.value).epsilon(1e-14));
}

TEST_CASE("degenerate horizons reduce to the fixed-time form") {
  const std::vector<std::int64_t> n(50, 7);
  for (double x : {0.0, 3.0, 50.0}) {
    CHECK(approx_crp(x, n, 0.5, p2).value == doctest::Approx(approx_fixed_time(x, 7.0, 0.5, p2).value).epsilon(1e-14));
    CHECK(approx_rw(x, n, 0.5, p2).value == doctest::Approx(approx_crp(x, n, 0.5, p2).value).epsilon(1e-14));
    CHECK(approx_crp(x, n, 0.5, p2).std_error == 0.0);
  }
}

TEST_CASE("compound Poisson forms") {
  const auto n = geometric_counts(1000, 0.2, 6);
  RngStream rng(8);
  std::vector<double> t(1000);
  for (auto& v : t) v = rng.exponential() * 3.0;
  const double a = 0.5, lambda = 2.0;
  const HorizonSamples hn = HorizonSamples::jump_counts(n);
  const HorizonSamples ht = HorizonSamples::times(t);
  for (double x : {1.0, 20.0, 300.0}) {
    CHECK(approx_poisson(x, hn, a, lambda, p2, Form::Poisson_NTau).value ==
          doctest::Approx(approx_crp(x, n, a, p2).value).epsilon(1e-14));
    const double lt = approx_poisson(x, ht, a, lambda, p2, Form::Poisson_LambdaTau).value;
    CHECK(approx_poisson(x, ht, a, lambda, p2, Form::Poisson_X1Tail).value == lt);
    double direct = 0.0;
    for (double s : t) direct += (p2.integrated_tail(x) - p2.integrated_tail(x + a * lambda * s)) / a;
    CHECK(lt == doctest::Approx(direct / t.size()).epsilon(1e-12));
  }
  CHECK(code_of([&] { approx_poisson(1, hn, a, lambda, p2, Form::Poisson_LambdaTau); }) == ErrorCode::FormMismatch);
  CHECK(code_of([&] { approx_poisson(1, ht, a, lambda, p2, Form::Poisson_NTau); }) == ErrorCode::FormMismatch);
  CHECK(code_of([&] { approx_poisson(1, ht, a, lambda, p2, Form::CRP_NTau); }) == ErrorCode::FormMismatch);
  CHECK(code_of([&] {
          approx_poisson(1, ht, a, lambda, TailModel::exponential(1.0), Form::Poisson_LambdaTau);
        }) == ErrorCode::InvalidModel);
}

TEST_CASE("Levy form: closed form against quadrature of an arbitrary tail") {
  RngStream rng(2);
  std::vector<double> t(200);
  for (auto& v : t) v = rng.exponential() * 4.0;
  const double m = 1.5, lambda = 0.8;
  for (const auto& j : {TailModel::pareto(2.0, 1.0), TailModel::lognormal(0.5, 1.0, -3.0),
                        TailModel::weibull(0.5, 2.0)}) {
    CAPTURE(j.family_name());
    for (double x : {5.0, 50.0, 500.0}) {
      const ApproxResult closed = approx_levy(x, t, m, lambda, j);
      const ApproxResult quad = approx_levy(x, t, m, [&](double y) { return lambda * j.tail_bar(y); });
      CHECK(quad.value == doctest::Approx(closed.value).epsilon(1e-8));
      CHECK(closed.form == Form::Levy_X1Tail);
    }
  }
  const std::vector<double> zeros(3, 0.0);
  CHECK(approx_levy(10.0, zeros, m, lambda, p2).value == 0.0);
}

TEST_CASE("input guards") {
  const std::vector<std::int64_t> empty;
  const std::vector<std::int64_t> neg{1, -1};
  const std::vector<std::int64_t> zero{0, 2};
  CHECK(code_of([&] { approx_crp(1.0, empty, 1.0, p2); }) == ErrorCode::EmptySamples);
  CHECK(code_of([&] { approx_crp(1.0, neg, 1.0, p2); }) != ErrorCode::EmptySamples);
  CHECK(code_of([&] { approx_rw(1.0, zero, 1.0, p2); }) == ErrorCode::SampleBelowOne);
  CHECK_THROWS_AS(approx_crp(1.0, zero, 0.0, p2), Error);
  CHECK_THROWS_AS(approx_fixed_time(1.0, -1.0, 1.0, p2), Error);
}
