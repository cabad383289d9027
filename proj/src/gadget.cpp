#include "rbext/gadget.hpp"

#include <cmath>
#include <stdexcept>

namespace rbext {

void Rational::validate_rate() const {
  if (den <= 0 || num <= 0 || num > den) {
    throw std::invalid_argument("delta must be a rational in (0, 1]");
  }
}

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  Rational r;
  std::size_t used = 0;
  if (slash == std::string::npos) {
    r.num = std::stoll(text, &used);
    r.den = 1;
    if (used != text.size()) {
      throw std::invalid_argument("Rational::parse: bad integer: " + text);
    }
  } else {
    r.num = std::stoll(text.substr(0, slash), &used);
    if (used != slash) {
      throw std::invalid_argument("Rational::parse: bad numerator: " + text);
    }
    r.den = std::stoll(text.substr(slash + 1), &used);
    if (used != text.size() - slash - 1) {
      throw std::invalid_argument("Rational::parse: bad denominator: " + text);
    }
  }
  return r;
}

GadgetParams make_gadget_params(std::size_t n_bits, Rational delta) {
  if (n_bits < 1) {
    throw std::invalid_argument("make_gadget_params: n_bits must be >= 1");
  }
  delta.validate_rate();

  GadgetParams p;
  p.n_bits = n_bits;
  p.delta = delta;
  // d = ceil((1 + delta/2) n) - 1 = n + ceil(n*num / (2*den)) - 1, exactly.
  const std::int64_t n = static_cast<std::int64_t>(n_bits);
  using i128 = __int128;
  const i128 half = i128(n) * delta.num;  // delta*n numerator over 2*den
  const i128 ceil_half = (half + 2 * i128(delta.den) - 1) / (2 * i128(delta.den));
  p.d = static_cast<std::size_t>(n + static_cast<std::int64_t>(ceil_half) - 1);
  p.m = 2 * p.d - p.n_bits + 1;
  // eps = 2^{-(delta n + n - d - 1)/2} from the rounded integer d.
  const long double delta_n =
      static_cast<long double>(n) * delta.num / delta.den;
  p.eps_log2 =
      -(delta_n + static_cast<long double>(n) - static_cast<long double>(p.d) -
        1.0L) /
      2.0L;
  p.eps = std::exp2(p.eps_log2);
  return p;
}

BitString extract(const GadgetParams& params, const BitString& y,
                  const BitString& s) {
  if (y.size() != params.n_bits) {
    throw std::invalid_argument("extract: input length must be n_bits");
  }
  if (s.size() != params.d) {
    throw std::invalid_argument("extract: seed length must be d");
  }
  return toeplitz_matvec_packed(params.toeplitz_spec(), s, y);
}

BitString extract_expanded(const GadgetParams& params, const BitString& y,
                           const BitString& s) {
  BitString z = extract(params, y, s);
  z.append(s);
  return z;
}

}  // namespace rbext
