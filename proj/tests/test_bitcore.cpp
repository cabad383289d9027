#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rbext/bitstring.hpp"
#include "rbext/sources.hpp"
#include "rbext/toeplitz.hpp"

using namespace rbext;

namespace {

// Dense-matrix oracle: materialize T explicitly and multiply bit by bit.
BitString dense_matvec(const ToeplitzSpec& spec, const BitString& seed,
                       const BitString& input) {
  std::vector<std::vector<int>> T(spec.u, std::vector<int>(spec.n));
  for (std::size_t i = 1; i <= spec.u; ++i) {
    for (std::size_t j = 1; j <= spec.n; ++j) {
      // T[i][j] = s_{j-i}; array index k holds s_{k-(u-1)}.
      T[i - 1][j - 1] = seed.get(j - i + spec.u - 1);
    }
  }
  BitString out(spec.u);
  for (std::size_t i = 0; i < spec.u; ++i) {
    int acc = 0;
    for (std::size_t j = 0; j < spec.n; ++j) {
      acc ^= T[i][j] & (input.get(j) ? 1 : 0);
    }
    out.set(i, acc != 0);
  }
  return out;
}

}  // namespace

TEST_CASE("BitString basics") {
  BitString s;
  CHECK(s.empty());
  s.push_back(true);
  s.push_back(false);
  s.push_back(true);
  CHECK(s.size() == 3);
  CHECK(s.get(0));
  CHECK(!s.get(1));
  CHECK(s.get(2));
  CHECK_THROWS_AS(s.get(3), std::out_of_range);
  CHECK_THROWS_AS(s.set(3, true), std::out_of_range);
  CHECK(s.count_ones() == 2);
}

TEST_CASE("BitString byte layout is LSB-first") {
  const std::uint8_t bytes[] = {0x01, 0x80};
  const BitString s = BitString::from_bytes(bytes, 16);
  CHECK(s.get(0));
  for (std::size_t i = 1; i < 15; ++i) {
    CHECK(!s.get(i));
  }
  CHECK(s.get(15));
  CHECK(s.to_bytes() == std::vector<std::uint8_t>{0x01, 0x80});
}

TEST_CASE("BitString append/slice/word transfer round-trips") {
  Prng prng(42);
  for (int t = 0; t < 50; ++t) {
    const std::size_t len = 1 + prng.next_u64() % 300;
    const BitString a = prng.next_bits(len);
    const std::size_t len2 = 1 + prng.next_u64() % 300;
    const BitString b = prng.next_bits(len2);
    BitString joined = a;
    joined.append(b);
    REQUIRE(joined.size() == len + len2);
    CHECK(joined.slice(0, len) == a);
    CHECK(joined.slice(len, len2) == b);

    const std::size_t pos = prng.next_u64() % len;
    const std::size_t cnt = 1 + prng.next_u64() % (len - pos);
    std::vector<std::uint64_t> words((cnt + 63) / 64);
    joined.extract_words(pos, cnt, words.data());
    BitString copy(joined.size());
    copy.deposit_words(pos, cnt, words.data());
    CHECK(copy.slice(pos, cnt) == joined.slice(pos, cnt));
  }
}

TEST_CASE("toeplitz 1x1") {
  const ToeplitzSpec spec{1, 1};
  const BitString out = toeplitz_matvec(spec, BitString::from_bits({1}),
                                        BitString::from_bits({1}));
  CHECK(out == BitString::from_bits({1}));
}

TEST_CASE("toeplitz zero input gives zero output") {
  Prng prng(7);
  const ToeplitzSpec spec{10, 4};
  const BitString seed = prng.next_bits(spec.seed_len());
  const BitString out = toeplitz_matvec(spec, seed, BitString(10));
  CHECK(out == BitString(4));
}

TEST_CASE("toeplitz 2x2 worked example") {
  // seed (s_-1, s_0, s_1) = (1, 0, 1): T = [[0,1],[1,0]], input (1,0).
  const ToeplitzSpec spec{2, 2};
  const BitString seed = BitString::from_bits({1, 0, 1});
  const BitString input = BitString::from_bits({1, 0});
  const BitString expect = BitString::from_bits({0, 1});
  CHECK(toeplitz_matvec(spec, seed, input) == expect);
  CHECK(dense_matvec(spec, seed, input) == expect);
}

TEST_CASE("toeplitz length mismatch rejected") {
  const ToeplitzSpec spec{4, 3};
  Prng prng(1);
  CHECK_THROWS_AS(
      toeplitz_matvec(spec, prng.next_bits(5), prng.next_bits(4)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      toeplitz_matvec(spec, prng.next_bits(6), prng.next_bits(3)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      toeplitz_matvec_packed(spec, prng.next_bits(5), prng.next_bits(4)),
      std::invalid_argument);
}

TEST_CASE("packed, kernel and reference paths agree (randomized)") {
  Prng prng(0xd1ff);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t u = 1 + prng.next_u64() % 256;
    const std::size_t n = 1 + prng.next_u64() % 256;
    const ToeplitzSpec spec{n, u};
    const BitString seed = prng.next_bits(spec.seed_len());
    const BitString input = prng.next_bits(n);
    const BitString ref = toeplitz_matvec(spec, seed, input);
    REQUIRE(toeplitz_matvec_packed(spec, seed, input) == ref);
    if (t % 20 == 0) {
      REQUIRE(ToeplitzKernel(spec, seed).apply(input) == ref);
      REQUIRE(dense_matvec(spec, seed, input) == ref);
    }
  }
}

TEST_CASE("reference-parameter block shape 167x496") {
  Prng prng(0x496);
  const ToeplitzSpec spec{496, 167};
  const BitString seed = prng.next_bits(spec.seed_len());
  const BitString input = prng.next_bits(496);
  const BitString ref = toeplitz_matvec(spec, seed, input);
  CHECK(toeplitz_matvec_packed(spec, seed, input) == ref);
  CHECK(ToeplitzKernel(spec, seed).apply(input) == ref);
}

TEST_CASE("linearity over GF(2)") {
  Prng prng(99);
  for (int t = 0; t < 100; ++t) {
    const std::size_t u = 1 + prng.next_u64() % 32;
    const std::size_t n = 1 + prng.next_u64() % 64;
    const ToeplitzSpec spec{n, u};
    const BitString seed = prng.next_bits(spec.seed_len());
    const BitString x = prng.next_bits(n);
    const BitString y = prng.next_bits(n);
    CHECK(toeplitz_matvec_packed(spec, seed, x ^ y) ==
          (toeplitz_matvec_packed(spec, seed, x) ^
           toeplitz_matvec_packed(spec, seed, y)));
  }
}

TEST_CASE("seed-bit flip touches exactly the diagonal's rows") {
  Prng prng(123);
  const std::size_t u = 5;
  const std::size_t n = 9;
  const ToeplitzSpec spec{n, u};
  const BitString ones = [&] {
    BitString s(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.set(i, true);
    }
    return s;
  }();
  for (int t = 0; t < 20; ++t) {
    BitString seed = prng.next_bits(spec.seed_len());
    const BitString base = toeplitz_matvec(spec, seed, ones);
    const std::size_t k = prng.next_u64() % spec.seed_len();
    seed.set(k, !seed.get(k));
    const BitString flipped = toeplitz_matvec(spec, seed, ones);
    // With all-ones input, output bit i toggles iff column j = i + k-(u-1)
    // exists, i.e. the diagonal s_{k-(u-1)} crosses row i.
    const std::ptrdiff_t diag = std::ptrdiff_t(k) - std::ptrdiff_t(u - 1);
    for (std::size_t i = 1; i <= u; ++i) {
      const std::ptrdiff_t j = std::ptrdiff_t(i) + diag;
      const bool expect_toggle = j >= 1 && j <= std::ptrdiff_t(n);
      CHECK((base.get(i - 1) != flipped.get(i - 1)) == expect_toggle);
    }
  }
}
