#include "rbext/toeplitz.hpp"

#include <bit>
#include <stdexcept>

namespace rbext {

namespace {

void check_args(const ToeplitzSpec& spec, const BitString& seed,
                const BitString& input) {
  spec.validate();
  if (seed.size() != spec.seed_len()) {
    throw std::invalid_argument("toeplitz: seed length must be u+n-1");
  }
  if (input.size() != spec.n) {
    throw std::invalid_argument("toeplitz: input length must be n");
  }
}

}  // namespace

void ToeplitzSpec::validate() const {
  if (n < 1 || u < 1) {
    throw std::invalid_argument("ToeplitzSpec: u and n must be >= 1");
  }
}

BitString toeplitz_matvec(const ToeplitzSpec& spec, const BitString& seed,
                          const BitString& input) {
  check_args(spec, seed, input);
  BitString out(spec.u);
  for (std::size_t i = 0; i < spec.u; ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < spec.n; ++j) {
      // T[i][j] = seed[j - i + u - 1]
      acc ^= seed.get(j + spec.u - 1 - i) && input.get(j);
    }
    out.set(i, acc);
  }
  return out;
}

BitString toeplitz_matvec_packed(const ToeplitzSpec& spec,
                                 const BitString& seed,
                                 const BitString& input) {
  check_args(spec, seed, input);
  const std::size_t nw = (spec.n + 63) / 64;
  std::vector<std::uint64_t> row(nw);
  BitString out(spec.u);
  for (std::size_t i = 0; i < spec.u; ++i) {
    seed.extract_words(spec.u - 1 - i, spec.n, row.data());
    std::uint64_t parity = 0;
    const auto in = input.words();
    for (std::size_t k = 0; k < nw; ++k) {
      parity ^= std::uint64_t(std::popcount(row[k] & in[k]));
    }
    out.set(i, (parity & 1) != 0);
  }
  return out;
}

ToeplitzKernel::ToeplitzKernel(const ToeplitzSpec& spec, const BitString& seed)
    : spec_(spec),
      out_words_((spec.u + 63) / 64),
      n_bytes_((spec.n + 7) / 8) {
  spec_.validate();
  if (seed.size() != spec_.seed_len()) {
    throw std::invalid_argument("ToeplitzKernel: seed length must be u+n-1");
  }
  // Column j packed into out_words: bit i = seed[u-1+j-i], i.e. the seed
  // window [j, j+u) reversed.
  std::vector<std::uint64_t> cols(spec_.n * out_words_, 0);
  for (std::size_t j = 0; j < spec_.n; ++j) {
    for (std::size_t i = 0; i < spec_.u; ++i) {
      if (seed.get(spec_.u - 1 + j - i)) {
        cols[j * out_words_ + i / 64] |= std::uint64_t(1) << (i % 64);
      }
    }
  }
  table_.assign(n_bytes_ * 256 * out_words_, 0);
  for (std::size_t c = 0; c < n_bytes_; ++c) {
    std::uint64_t* chunk = table_.data() + c * 256 * out_words_;
    for (unsigned v = 1; v < 256; ++v) {
      const unsigned low = v & (v - 1);
      const unsigned bit = static_cast<unsigned>(std::countr_zero(v));
      const std::size_t j = 8 * c + bit;
      const std::uint64_t* prev = chunk + low * out_words_;
      std::uint64_t* cur = chunk + v * out_words_;
      for (std::size_t w = 0; w < out_words_; ++w) {
        cur[w] = prev[w];
        if (j < spec_.n) {
          cur[w] ^= cols[j * out_words_ + w];
        }
      }
    }
  }
}

void ToeplitzKernel::apply(const std::uint64_t* input,
                           std::uint64_t* out) const {
  for (std::size_t w = 0; w < out_words_; ++w) {
    out[w] = 0;
  }
  for (std::size_t c = 0; c < n_bytes_; ++c) {
    const unsigned byte =
        static_cast<unsigned>(input[c / 8] >> (8 * (c % 8))) & 0xffu;
    if (byte == 0) {
      continue;
    }
    const std::uint64_t* row = table_.data() + (c * 256 + byte) * out_words_;
    for (std::size_t w = 0; w < out_words_; ++w) {
      out[w] ^= row[w];
    }
  }
}

BitString ToeplitzKernel::apply(const BitString& input) const {
  if (input.size() != spec_.n) {
    throw std::invalid_argument("ToeplitzKernel: input length must be n");
  }
  std::vector<std::uint64_t> out(out_words_);
  apply(input.words().data(), out.data());
  BitString res(spec_.u);
  res.deposit_words(0, spec_.u, out.data());
  return res;
}

void ToeplitzKernel::apply_at(const BitString& input, std::size_t bit_offset,
                              std::uint64_t* out) const {
  std::uint64_t buf[64];
  const std::size_t nw = (spec_.n + 63) / 64;
  if (nw <= 64) {
    input.extract_words(bit_offset, spec_.n, buf);
    apply(buf, out);
  } else {
    std::vector<std::uint64_t> big(nw);
    input.extract_words(bit_offset, spec_.n, big.data());
    apply(big.data(), out);
  }
}

}  // namespace rbext
