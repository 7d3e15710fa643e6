#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htm/distributions.hpp"

namespace htm {

enum class Form {
  CRP_NTau,
  FixedTime_ENt,
  RW_Tau,
  Poisson_NTau,
  Poisson_LambdaTau,
  Poisson_X1Tail,
  Levy_X1Tail,
};

std::string to_string(Form form);
/// Inverse of to_string; ConfigError on unknown names.
Form form_from_string(const std::string& name);
const std::vector<Form>& all_forms();

/// One evaluated right-hand side. `std_error` is the Monte Carlo error of the
/// sample mean (0 for closed forms).
struct ApproxResult {
  double x = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  Form form = Form::CRP_NTau;
  std::int64_t n_samples = 0;
};

/// (1/a) mean_i [F_I(x) - F_I(x + a N_i)].
ApproxResult approx_crp(double x, std::span<const std::int64_t> ntau_samples, double a,
                        const TailModel& jump);

/// (1/a) [F_I(x) - F_I(x + a E N_t)].
ApproxResult approx_fixed_time(double x, double expected_jumps, double a, const TailModel& jump);

/// (1/a) mean_i [F_I(x) - F_I(x + a tau_i)] over counting horizons tau_i >= 1.
ApproxResult approx_rw(double x, std::span<const std::int64_t> tau_samples, double a,
                       const TailModel& jump);

/// Tagged horizon sample buffer for the compound Poisson forms.
struct HorizonSamples {
  enum class Kind { JumpCounts, Times };
  Kind kind = Kind::Times;
  std::vector<double> values;

  static HorizonSamples jump_counts(std::span<const std::int64_t> n);
  static HorizonSamples times(std::span<const double> t);
};

/// The three compound Poisson displays. Poisson_NTau takes jump counts, the
/// other two take times. Poisson_X1Tail replaces P{X_1 > v} with lambda F(v, inf).
ApproxResult approx_poisson(double x, const HorizonSamples& samples, double a, double lambda,
                            const TailModel& jump, Form form);

/// (1/m) mean_i int_x^{x + m tau_i} lambda F(y, inf) dy, closed through F_I.
ApproxResult approx_levy(double x, std::span<const double> tau_samples, double m, double lambda,
                         const TailModel& big_jump);

/// Same with an arbitrary tail of X_1, integrated by adaptive quadrature.
ApproxResult approx_levy(double x, std::span<const double> tau_samples, double m,
                         const std::function<double(double)>& x1_tail);

}  // namespace htm
