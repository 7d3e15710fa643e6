#pragma once

#include <functional>

namespace htm::quad {

struct Tolerance {
  double absolute = 1e-12;
  double relative = 1e-10;
  int max_depth = 48;
  long max_evaluations = 20'000'000;
};

/// Adaptive Simpson integral of f over [lo, hi]. A panel is accepted when its
/// Richardson error is below max(absolute share, relative * |panel|).
/// Throws QuadratureNotConverged past the depth or evaluation cap.
double simpson(const std::function<double(double)>& f, double lo, double hi,
               const Tolerance& tol = {});

/// Integral of a non-negative, eventually decreasing f over [lo, inf):
/// panels of doubling width until f at the panel end drops below
/// `cutoff`. The remainder past the cutoff is dropped.
double simpson_to_infinity(const std::function<double(double)>& f, double lo,
                           double first_width, double cutoff,
                           const Tolerance& tol = {});

/// Integral over [lo, hi] split at the geometric points lo+1, lo+2, lo+4, ...
/// Suited to integrands with fine structure near lo and slow variation far out.
double simpson_geometric(const std::function<double(double)>& f, double lo,
                         double hi, const Tolerance& tol = {});

}  // namespace htm::quad
