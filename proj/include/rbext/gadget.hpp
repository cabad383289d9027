#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "rbext/bitstring.hpp"
#include "rbext/toeplitz.hpp"

namespace rbext {

// Min-entropy rate delta carried as an exact rational (bits-per-sample over
// sample width, e.g. 10.74 bits / 16-bit sample as 1074/1600) so the derived
// integer parameters are bit-exactly reproducible across platforms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  void validate_rate() const;  // requires 0 < num/den <= 1
  std::string str() const;
  static Rational parse(const std::string& text);  // "num/den" or "num"
};

// Per-block-size parameters of the expanded Toeplitz gadget:
//   d = ceil((1+delta/2) n) - 1, m = 2d - n + 1,
//   eps = 2^{-(delta n + n - d - 1)/2} recomputed from the rounded d.
struct GadgetParams {
  std::size_t n_bits = 0;
  Rational delta;
  std::size_t d = 0;    // seed length
  std::size_t m = 0;    // expanded output length
  long double eps = 0;  // gadget error
  long double eps_log2 = 0;

  std::size_t out_len() const { return d - n_bits + 1; }
  ToeplitzSpec toeplitz_spec() const { return ToeplitzSpec{n_bits, out_len()}; }
};

GadgetParams make_gadget_params(std::size_t n_bits, Rational delta);

// Ext_T(y, s) = T_s . y over GF(2).
BitString extract(const GadgetParams& params, const BitString& y,
                  const BitString& s);

// Ext_T'(y, s) = (T_s . y, s); the last d bits equal the seed exactly, which
// is what lets the equal-block scheme reuse one seed for every block.
BitString extract_expanded(const GadgetParams& params, const BitString& y,
                           const BitString& s);

}  // namespace rbext
