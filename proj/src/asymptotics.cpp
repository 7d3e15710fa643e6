#include "htm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "htm/error.hpp"
#include "htm/quadrature.hpp"

namespace htm {
namespace {

struct FormName {
  Form form;
  const char* name;
};

constexpr FormName kForms[] = {
    {Form::CRP_NTau, "CRP_NTau"},
    {Form::FixedTime_ENt, "FixedTime_ENt"},
    {Form::RW_Tau, "RW_Tau"},
    {Form::Poisson_NTau, "Poisson_NTau"},
    {Form::Poisson_LambdaTau, "Poisson_LambdaTau"},
    {Form::Poisson_X1Tail, "Poisson_X1Tail"},
    {Form::Levy_X1Tail, "Levy_X1Tail"},
};

// Distinct horizon values with multiplicities, ascending.
using Histogram = std::vector<std::pair<double, std::int64_t>>;

Histogram histogram(std::span<const std::int64_t> v) {
  std::map<std::int64_t, std::int64_t> counts;
  for (auto n : v) ++counts[n];
  Histogram h;
  h.reserve(counts.size());
  for (const auto& [k, c] : counts) h.emplace_back(static_cast<double>(k), c);
  return h;
}

Histogram histogram(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  Histogram h;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    h.emplace_back(sorted[i], static_cast<std::int64_t>(j - i));
    i = j;
  }
  return h;
}

// Mean and standard error of term(v) over the histogram, two-pass.
template <typename Term>
std::pair<double, double> mean_and_se(const Histogram& h, std::int64_t n, Term term) {
  std::vector<double> values(h.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    values[i] = term(h[i].first);
    sum += values[i] * static_cast<double>(h[i].second);
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double d = values[i] - mean;
    ss += d * d * static_cast<double>(h[i].second);
  }
  return {mean, std::sqrt(ss / (nn - 1.0) / nn)};
}

ApproxResult integrated_form(double x, const Histogram& h, std::int64_t n, double scale,
                             double rate, const TailModel& jump, Form form) {
  require(n > 0, ErrorCode::EmptySamples, to_string(form) + ": no horizon samples");
  const double fi_x = jump.integrated_tail(x);
  auto [mean, se] = mean_and_se(h, n, [&](double v) {
    if (v <= 0.0) return 0.0;
    return std::max(0.0, fi_x - jump.integrated_tail(x + scale * v));
  });
  const double k = rate / scale;
  return ApproxResult{x, k * mean, k * se, form, n};
}

void require_scale(double a, const char* what) {
  require(std::isfinite(a) && a > 0.0, ErrorCode::InvalidArgument,
          std::string(what) + " must be positive and finite");
}

void require_heavy(const TailModel& jump) {
  require(jump.heavy_tailed(), ErrorCode::InvalidModel,
          "the compound Poisson and Levy forms need a heavy-tailed jump law, got " +
              jump.family_name());
}

}  // namespace

std::string to_string(Form form) {
  for (const auto& f : kForms) {
    if (f.form == form) return f.name;
  }
  return "?";
}

Form form_from_string(const std::string& name) {
  for (const auto& f : kForms) {
    if (name == f.name) return f.form;
  }
  fail(ErrorCode::ConfigError, "unknown approximation form '" + name + "'");
}

const std::vector<Form>& all_forms() {
  static const std::vector<Form> forms = [] {
    std::vector<Form> out;
    for (const auto& f : kForms) out.push_back(f.form);
    return out;
  }();
  return forms;
}

ApproxResult approx_crp(double x, std::span<const std::int64_t> ntau_samples, double a,
                        const TailModel& jump) {
  require_scale(a, "a");
  for (auto n : ntau_samples) {
    require(n >= 0, ErrorCode::InvalidArgument, "N_tau samples must be nonnegative");
  }
  return integrated_form(x, histogram(ntau_samples),
                         static_cast<std::int64_t>(ntau_samples.size()), a, 1.0, jump,
                         Form::CRP_NTau);
}

ApproxResult approx_fixed_time(double x, double expected_jumps, double a, const TailModel& jump) {
  require_scale(a, "a");
  require(expected_jumps >= 0.0, ErrorCode::InvalidArgument, "E N_t must be nonnegative");
  double value = 0.0;
  if (expected_jumps > 0.0) {
    value = std::max(0.0, jump.integrated_tail(x) - jump.integrated_tail(x + a * expected_jumps)) / a;
  }
  return ApproxResult{x, value, 0.0, Form::FixedTime_ENt, 1};
}

ApproxResult approx_rw(double x, std::span<const std::int64_t> tau_samples, double a,
                       const TailModel& jump) {
  require_scale(a, "a");
  for (auto t : tau_samples) {
    require(t >= 1, ErrorCode::SampleBelowOne,
            "random walk horizons must satisfy tau >= 1, got " + std::to_string(t));
  }
  return integrated_form(x, histogram(tau_samples), static_cast<std::int64_t>(tau_samples.size()),
                         a, 1.0, jump, Form::RW_Tau);
}

HorizonSamples HorizonSamples::jump_counts(std::span<const std::int64_t> n) {
  HorizonSamples s;
  s.kind = Kind::JumpCounts;
  s.values.reserve(n.size());
  for (auto k : n) s.values.push_back(static_cast<double>(k));
  return s;
}

HorizonSamples HorizonSamples::times(std::span<const double> t) {
  HorizonSamples s;
  s.kind = Kind::Times;
  s.values.assign(t.begin(), t.end());
  return s;
}

ApproxResult approx_poisson(double x, const HorizonSamples& samples, double a, double lambda,
                            const TailModel& jump, Form form) {
  require_scale(a, "a");
  require_scale(lambda, "lambda");
  require_heavy(jump);
  using K = HorizonSamples::Kind;
  const auto n = static_cast<std::int64_t>(samples.values.size());
  const Histogram h = histogram(std::span<const double>(samples.values));
  switch (form) {
    case Form::Poisson_NTau:
      require(samples.kind == K::JumpCounts, ErrorCode::FormMismatch,
              "Poisson_NTau needs N_tau samples");
      return integrated_form(x, h, n, a, 1.0, jump, form);
    case Form::Poisson_LambdaTau:
      require(samples.kind == K::Times, ErrorCode::FormMismatch,
              "Poisson_LambdaTau needs tau samples");
      return integrated_form(x, h, n, a * lambda, lambda, jump, form);
    case Form::Poisson_X1Tail:
      // (1/(a lambda)) E int_x^{x + a lambda tau} lambda F(v, inf) dv
      require(samples.kind == K::Times, ErrorCode::FormMismatch,
              "Poisson_X1Tail needs tau samples");
      return integrated_form(x, h, n, a * lambda, lambda, jump, form);
    default:
      fail(ErrorCode::FormMismatch, to_string(form) + " is not a compound Poisson form");
  }
}

ApproxResult approx_levy(double x, std::span<const double> tau_samples, double m, double lambda,
                         const TailModel& big_jump) {
  require_scale(m, "m");
  require_scale(lambda, "lambda");
  require_heavy(big_jump);
  return integrated_form(x, histogram(tau_samples), static_cast<std::int64_t>(tau_samples.size()),
                         m, lambda, big_jump, Form::Levy_X1Tail);
}

ApproxResult approx_levy(double x, std::span<const double> tau_samples, double m,
                         const std::function<double(double)>& x1_tail) {
  require_scale(m, "m");
  const auto n = static_cast<std::int64_t>(tau_samples.size());
  require(n > 0, ErrorCode::EmptySamples, "Levy_X1Tail: no horizon samples");
  const Histogram h = histogram(tau_samples);
  // Integrals over [x, x + m tau] accumulated along the sorted horizons.
  const double scale = std::max(x1_tail(x), 1e-300);
  quad::Tolerance tol;
  tol.absolute = 1e-14 * scale;
  tol.relative = 1e-10;
  std::vector<double> integral(h.size());
  double acc = 0.0;
  double upper = x;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double end = x + m * std::max(h[i].first, 0.0);
    if (end > upper) {
      acc += quad::simpson_geometric(x1_tail, upper, end, tol);
      upper = end;
    }
    integral[i] = acc;
  }
  std::size_t idx = 0;
  Histogram indexed = h;
  for (auto& e : indexed) e.first = static_cast<double>(idx++);
  auto [mean, se] = mean_and_se(indexed, n, [&](double i) {
    return integral[static_cast<std::size_t>(i)];
  });
  return ApproxResult{x, mean / m, se / m, Form::Levy_X1Tail, n};
}

}  // namespace htm
