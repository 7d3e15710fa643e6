#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <fftw3.h>

#include "htm/distributions.hpp"
#include "htm/error.hpp"

namespace htm {
namespace {

// Owning FFTW buffers for one real-to-complex transform size.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        real_(fftw_alloc_real(n)),
        spec_(fftw_alloc_complex(n / 2 + 1)) {
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  double* real() { return real_; }
  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_); }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  std::size_t n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan backward_;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

GridTail discretize_tail(const std::function<double(double)>& tail, double step,
                         double cutoff, std::size_t max_points) {
  require(step > 0.0, ErrorCode::InvalidArgument, "grid step must be positive");
  GridTail g;
  g.step = step;
  for (std::size_t k = 0;; ++k) {
    if (k >= max_points) {
      fail(ErrorCode::InvalidArgument,
           "tail stays above the cutoff for " + std::to_string(max_points) +
               " grid points; increase the step");
    }
    const double v = tail(static_cast<double>(k) * step);
    g.values.push_back(v);
    if (v < cutoff) break;
  }
  return g;
}

KestenReport kesten_check(const GridTail& gtail, double delta, int n_max,
                          const KestenOptions& options) {
  require(delta > 0.0, ErrorCode::InvalidArgument, "delta must be positive");
  require(n_max >= 1, ErrorCode::InvalidArgument, "n_max must be at least 1");
  require(gtail.step > 0.0, ErrorCode::InvalidArgument, "grid step must be positive");
  const auto& g = gtail.values;
  require(!g.empty(), ErrorCode::InvalidArgument, "empty grid tail");
  require(g.front() <= 1.0 && g.back() >= 0.0, ErrorCode::InvalidArgument,
          "grid tail must lie in [0, 1]");
  for (std::size_t k = 1; k < g.size(); ++k) {
    require(g[k] <= g[k - 1], ErrorCode::InvalidArgument, "grid tail must be non-increasing");
  }

  // Lattice law Z = h*ceil(Y/h): P{Z = 0} = 1 - G(0), P{Z = kh} = G((k-1)h) - G(kh).
  // Mass beyond the last grid point is lumped one step past it, so the
  // one-fold tail reproduces G exactly at every grid point.
  const std::size_t last = g.size() - 1;
  std::vector<double> base(g.size() + 1, 0.0);
  base[0] = 1.0 - g[0];
  for (std::size_t k = 1; k <= last; ++k) base[k] = g[k - 1] - g[k];
  base[last + 1] = g[last];

  const std::size_t support = static_cast<std::size_t>(n_max) * (base.size() - 1) + 1;
  RealFft fft(next_pow2(support));
  const std::size_t n = fft.size();
  std::fill(fft.real(), fft.real() + n, 0.0);
  std::copy(base.begin(), base.end(), fft.real());
  fft.forward();
  const std::size_t bins = n / 2 + 1;
  std::vector<std::complex<double>> spectrum(fft.spectrum(), fft.spectrum() + bins);
  std::vector<std::complex<double>> power(bins, std::complex<double>(1.0, 0.0));

  KestenReport report;
  report.delta = delta;
  report.floor = options.floor;
  for (std::size_t k = 0; k <= last; ++k) {
    if (g[k] >= options.floor) ++report.retained_points;
  }

  std::vector<double> pmf(n);
  for (int fold = 1; fold <= n_max; ++fold) {
    for (std::size_t b = 0; b < bins; ++b) power[b] *= spectrum[b];
    const std::size_t len = static_cast<std::size_t>(fold) * (base.size() - 1) + 1;
    if (fold == 1) {
      std::copy(base.begin(), base.end(), pmf.begin());
    } else {
      std::copy(power.begin(), power.end(), fft.spectrum());
      fft.backward();
      for (std::size_t i = 0; i < len; ++i) pmf[i] = std::max(0.0, fft.real()[i] / double(n));
    }

    // Suffix sums from the far end keep the small tail values accurate.
    std::vector<double> tail_above(len, 0.0);
    double acc = 0.0;
    for (std::size_t i = len; i-- > 0;) {
      tail_above[i] = acc;  // P{sum > i*h}
      acc += pmf[i];
    }
    const double defect = std::fabs(1.0 - acc);
    report.mass_defect.push_back(defect);
    if (defect > options.max_mass_defect) {
      fail(ErrorCode::GridTooCoarse, "mass defect " + std::to_string(defect) + " at n = " +
                                         std::to_string(fold) + " exceeds " +
                                         std::to_string(options.max_mass_defect));
    }
    double sup = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
      if (g[k] < options.floor) continue;
      sup = std::max(sup, tail_above[k] / g[k]);
    }
    report.per_n_raw.push_back(sup);
    const double constant = sup / std::pow(1.0 + delta, fold);
    report.per_n.push_back(constant);
    report.c_hat = std::max(report.c_hat, constant);
  }
  return report;
}

}  // namespace htm
