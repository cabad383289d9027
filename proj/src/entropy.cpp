#include "rbext/entropy.hpp"

#include <cmath>

namespace rbext {

namespace {

long double residual(long double g, unsigned b, double R,
                     bool normalize_range) {
  const long double levels = std::exp2(static_cast<long double>(b)) - 2.0L;
  const long double lhs_num = normalize_range ? static_cast<long double>(R)
                                              : 1.0L;
  return std::erf(lhs_num / (levels * g)) -
         0.5L * std::erf(static_cast<long double>(R) / g);
}

}  // namespace

void HomodyneModel::validate() const {
  if (!(b >= 2)) {
    throw std::invalid_argument("HomodyneModel: b must be >= 2");
  }
  if (!(R > 0)) {
    throw std::invalid_argument("HomodyneModel: R must be > 0");
  }
  if (!(sigma_u2 >= 0) || !(sigma_x2 > sigma_u2) || !(var_x >= sigma_x2)) {
    throw std::invalid_argument(
        "HomodyneModel: requires var_x >= sigma_x2 > sigma_u2 >= 0");
  }
}

long double solve_g_star(unsigned b, double R, long double tol,
                         bool normalize_range) {
  if (b < 2 || !(R > 0) || !(tol > 0)) {
    throw std::invalid_argument("solve_g_star: b >= 2, R > 0, tol > 0");
  }
  // residual -> +1/2 as g -> 0+, so grow the bracket upward from a small
  // starting guess until the sign flips.
  long double lo = static_cast<long double>(R) *
                   std::exp2(-static_cast<long double>(b));
  long double flo = residual(lo, b, R, normalize_range);
  while (flo < 0) {
    lo /= 2.0L;
    flo = residual(lo, b, R, normalize_range);
    if (lo < 1e-300L) {
      throw SolveError("solve_g_star: no sign change below start guess");
    }
  }
  long double hi = lo;
  long double fhi = flo;
  for (int i = 0; fhi > 0; ++i) {
    if (i > 2000) {
      throw SolveError("solve_g_star: no sign change in bracket budget");
    }
    hi *= 2.0L;
    fhi = residual(hi, b, R, normalize_range);
  }
  long double mid = hi;
  long double fmid = fhi;
  for (int i = 0; i < 500 && std::fabs(fmid) > tol; ++i) {
    mid = 0.5L * (lo + hi);
    fmid = residual(mid, b, R, normalize_range);
    if (fmid > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::fabs(fmid) > tol) {
    throw SolveError("solve_g_star: residual did not reach tolerance");
  }
  return mid;
}

EntropyBound delta_star(const HomodyneModel& model, long double tol,
                        bool normalize_range) {
  model.validate();
  EntropyBound out;
  out.noise_n = 0.5L * static_cast<long double>(model.var_x) /
                    (static_cast<long double>(model.sigma_x2) - model.sigma_u2) -
                0.5L;
  out.g_star = solve_g_star(model.b, model.R, tol, normalize_range);
  const long double levels =
      std::exp2(static_cast<long double>(model.b)) - 2.0L;
  const long double lhs_num =
      normalize_range ? static_cast<long double>(model.R) : 1.0L;
  const long double prefactor =
      std::pow(std::sqrt(out.noise_n) + std::sqrt(out.noise_n + 1.0L), 2.0L);
  out.delta_star_raw =
      -std::log2(prefactor * std::erf(lhs_num / (levels * out.g_star)));
  out.delta_star = out.delta_star_raw;
  if (out.delta_star < 0) {
    out.delta_star = 0;
    out.clamped = true;
  } else if (out.delta_star > model.b) {
    out.delta_star = model.b;
    out.clamped = true;
  }
  out.zero_entropy = out.delta_star <= 0;
  return out;
}

long double span_min_entropy(const EntropyBound& bound, std::uint64_t span) {
  return bound.delta_star * static_cast<long double>(span);
}

std::uint32_t adc_quantize(double x, unsigned b, double R) {
  if (b < 2 || b > 30 || !(R > 0)) {
    throw std::invalid_argument("adc_quantize: 2 <= b <= 30, R > 0");
  }
  const std::uint32_t top = (std::uint32_t(1) << b);
  if (x <= -R) {
    return 1;
  }
  if (x > R) {
    return top;
  }
  const double width = 2.0 * R / (top - 2);
  // Interior bin j covers (-R + width(j-2), -R + width(j-1)]; the upper
  // boundary belongs to the lower-index bin.
  double t = std::ceil((x + R) / width);
  if (t < 1.0) {
    t = 1.0;
  }
  std::uint32_t j = 1 + static_cast<std::uint32_t>(t);
  if (j > top - 1) {
    j = top - 1;
  }
  return j;
}

double adc_dequantize(std::uint32_t j, unsigned b, double R) {
  const std::uint32_t top = (std::uint32_t(1) << b);
  if (j < 1 || j > top) {
    throw std::invalid_argument("adc_dequantize: level out of range");
  }
  const double width = 2.0 * R / (top - 2);
  if (j == 1) {
    return -R - width / 2;
  }
  if (j == top) {
    return R + width / 2;
  }
  return -R + width * (static_cast<double>(j) - 1.5);
}

Ar1Fit fit_ar1(std::span<const double> xs) {
  if (xs.size() < 3) {
    throw std::invalid_argument("fit_ar1: need at least 3 samples");
  }
  const std::size_t n = xs.size();
  double mean = 0;
  for (double x : xs) {
    mean += x;
  }
  mean /= static_cast<double>(n);
  double c0 = 0;
  double c1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = xs[i] - mean;
    c0 += a * a;
    if (i + 1 < n) {
      c1 += a * (xs[i + 1] - mean);
    }
  }
  c0 /= static_cast<double>(n);
  c1 /= static_cast<double>(n - 1);
  Ar1Fit fit;
  fit.var_x = c0;
  fit.phi = c0 > 0 ? c1 / c0 : 0;
  fit.sigma_x2 = c0 * (1.0 - fit.phi * fit.phi);
  return fit;
}

}  // namespace rbext
