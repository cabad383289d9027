#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace rbext {

// Homodyne-detection source description: stationary variance, conditional
// variances of the signal and of the excess noise, ADC bit depth and range.
// Units are arbitrary but must be consistent.
struct HomodyneModel {
  double var_x = 0;     // Var(X_t)
  double sigma_x2 = 0;  // Var(X_t | past)
  double sigma_u2 = 0;  // Var(U_t | past), excess noise
  unsigned b = 0;       // ADC bit depth
  double R = 0;         // ADC range

  void validate() const;  // var_x >= sigma_x2 > sigma_u2 >= 0, b >= 2, R > 0
};

// Certified min-entropy per quantized sample, in bits.
struct EntropyBound {
  long double noise_n = 0;  // virtual noise-photon parameter
  long double g_star = 0;
  long double delta_star = 0;      // clamped to [0, b]
  long double delta_star_raw = 0;  // before clamping
  bool clamped = false;
  bool zero_entropy = false;  // delta_star <= 0: extraction impossible
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solves erf(1/((2^b-2) g)) = (1/2) erf(R/g) by geometric bracket expansion
// and bisection; the returned g has residual <= tol. The equation is
// implemented exactly as stated; normalize_range replaces the left-hand
// argument by R/((2^b-2) g), the convention of the bound's source, since the
// stated form implicitly assumes R normalized to 1.
long double solve_g_star(unsigned b, double R, long double tol = 1e-12L,
                         bool normalize_range = false);

// delta* = -log2[(sqrt(n) + sqrt(n+1))^2 erf(1/((2^b-2) g*))] with
// n = (1/2) Var(X_t)/(sigma_X^2 - sigma_U^2) - 1/2.
EntropyBound delta_star(const HomodyneModel& model, long double tol = 1e-12L,
                        bool normalize_range = false);

// Reverse-block bound over a contiguous span of samples: span * delta_star.
long double span_min_entropy(const EntropyBound& bound, std::uint64_t span);

// ADC level index in [1, 2^b]: two unbounded outer bins and 2^b-2 interior
// bins of width 2R/(2^b-2); boundary points go to the lower-index bin.
std::uint32_t adc_quantize(double x, unsigned b, double R);
// Representative voltage for a level index (interior bin center; outer bins
// half a width beyond +-R).
double adc_dequantize(std::uint32_t j, unsigned b, double R);

// Lag-1 autocovariance fit under the AR(1) assumption. Model-dependent
// estimation, not a certification by itself.
struct Ar1Fit {
  double var_x = 0;
  double sigma_x2 = 0;
  double phi = 0;
};
Ar1Fit fit_ar1(std::span<const double> xs);

}  // namespace rbext
