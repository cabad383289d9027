#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rbext/bitstring.hpp"

namespace rbext {

// u x n Toeplitz matrix over GF(2), specified by a seed of u+n-1 bits.
// Seed array index k holds diagonal value s_{k-(u-1)}, so entry T[i][j]
// (1-based) = s_{j-i} = seed[j-i+u-1], and row i (0-based) is the contiguous
// seed window [u-1-i, u-1-i+n).
struct ToeplitzSpec {
  std::size_t n = 0;  // input length (bits)
  std::size_t u = 0;  // output length (bits)

  std::size_t seed_len() const { return u + n - 1; }
  void validate() const;
};

// Reference path: one bit at a time, directly from the definition.
BitString toeplitz_matvec(const ToeplitzSpec& spec, const BitString& seed,
                          const BitString& input);

// Word-parallel path: machine-word AND + popcount parity over packed rows.
// Bit-identical to the reference path.
BitString toeplitz_matvec_packed(const ToeplitzSpec& spec,
                                 const BitString& seed,
                                 const BitString& input);

// Partial products indexed by input byte, materialized once per (spec, seed)
// and reused across every block that shares the seed. apply() is then
// n/8 table lookups + XORs per block.
class ToeplitzKernel {
 public:
  ToeplitzKernel(const ToeplitzSpec& spec, const BitString& seed);

  const ToeplitzSpec& spec() const { return spec_; }
  std::size_t out_words() const { return out_words_; }

  // input must hold ceil(n/64) words with bits past n cleared;
  // out must hold out_words() words.
  void apply(const std::uint64_t* input, std::uint64_t* out) const;
  BitString apply(const BitString& input) const;
  // Applies to the n-bit window of input starting at bit_offset.
  void apply_at(const BitString& input, std::size_t bit_offset,
                std::uint64_t* out) const;

 private:
  ToeplitzSpec spec_;
  std::size_t out_words_;
  std::size_t n_bytes_;
  std::vector<std::uint64_t> table_;  // [n_bytes][256][out_words]
};

}  // namespace rbext
