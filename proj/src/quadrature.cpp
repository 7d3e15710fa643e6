#include "htm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "htm/error.hpp"

namespace htm::quad {
namespace {

struct Context {
  const std::function<double(double)>& f;
  const Tolerance& tol;
  long evaluations = 0;

  double eval(double x) {
    if (++evaluations > tol.max_evaluations) {
      fail(ErrorCode::QuadratureNotConverged,
           "adaptive Simpson exceeded " + std::to_string(tol.max_evaluations) +
               " evaluations");
    }
    return f(x);
  }
};

double refine(Context& ctx, double a, double b, double fa, double fm, double fb,
              double whole, double abs_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double flm = ctx.eval(0.5 * (a + m));
  const double frm = ctx.eval(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double both = left + right;
  const double diff = both - whole;
  const double threshold =
      std::max({abs_tol, ctx.tol.relative * std::fabs(both), 1e-300});
  if (std::fabs(diff) <= 15.0 * threshold) return both + diff / 15.0;
  if (depth <= 0) {
    fail(ErrorCode::QuadratureNotConverged,
         "adaptive Simpson hit maximum depth on [" + std::to_string(a) + ", " +
             std::to_string(b) + "]");
  }
  return refine(ctx, a, m, fa, flm, fm, left, 0.5 * abs_tol, depth - 1) +
         refine(ctx, m, b, fm, frm, fb, right, 0.5 * abs_tol, depth - 1);
}

double simpson_with(Context& ctx, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  // Start from a four-way split so integrands that look flat at three points
  // still get sampled.
  const double m = 0.5 * (lo + hi);
  const double fa = ctx.eval(lo);
  const double fm = ctx.eval(m);
  const double fb = ctx.eval(hi);
  const double f1 = ctx.eval(0.5 * (lo + m));
  const double f3 = ctx.eval(0.5 * (m + hi));
  const double left = (m - lo) / 6.0 * (fa + 4.0 * f1 + fm);
  const double right = (hi - m) / 6.0 * (fm + 4.0 * f3 + fb);
  const double half = 0.5 * ctx.tol.absolute;
  return refine(ctx, lo, m, fa, f1, fm, left, half, ctx.tol.max_depth) +
         refine(ctx, m, hi, fm, f3, fb, right, half, ctx.tol.max_depth);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double lo, double hi,
               const Tolerance& tol) {
  if (hi < lo) return -simpson(f, hi, lo, tol);
  Context ctx{f, tol};
  return simpson_with(ctx, lo, hi);
}

double simpson_to_infinity(const std::function<double(double)>& f, double lo,
                           double first_width, double cutoff, const Tolerance& tol) {
  require(first_width > 0.0, ErrorCode::InvalidArgument, "first_width must be positive");
  Context ctx{f, tol};
  double total = 0.0;
  double a = lo;
  double width = first_width;
  for (int panel = 0; panel < 1100; ++panel) {
    const double b = a + width;
    total += simpson_with(ctx, a, b);
    if (!std::isfinite(b) || ctx.eval(b) < cutoff) return total;
    a = b;
    width *= 2.0;
  }
  fail(ErrorCode::QuadratureNotConverged,
       "integrand did not decay below cutoff " + std::to_string(cutoff));
}

double simpson_geometric(const std::function<double(double)>& f, double lo,
                         double hi, const Tolerance& tol) {
  if (!(hi > lo)) return 0.0;
  Context ctx{f, tol};
  double total = 0.0;
  double a = lo;
  double step = 1.0;
  while (a < hi) {
    const double b = std::min(hi, lo + step);
    total += simpson_with(ctx, a, b);
    a = b;
    step *= 2.0;
  }
  return total;
}

}  // namespace htm::quad
