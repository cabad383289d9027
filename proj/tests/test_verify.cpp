#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "rbext/gadget.hpp"
#include "rbext/sources.hpp"
#include "rbext/toeplitz.hpp"
#include "rbext/verify.hpp"

using namespace rbext;

namespace {

// Naive quadratic TVD oracle: loop every (seed, y, output) triple with the
// reference matvec, no distribution-level shortcuts.
double tvd_oracle(const SmallSource& src, unsigned n, unsigned d) {
  const unsigned u = d - n + 1;
  const ToeplitzSpec spec{n, u};
  const double unif = 1.0 / std::pow(2.0, u) / std::pow(2.0, d);
  double total = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << d); ++s) {
    BitString seed(d);
    for (unsigned k = 0; k < d; ++k) {
      seed.set(k, (s >> k) & 1);
    }
    std::vector<double> out_prob(std::size_t(1) << u, 0.0);
    for (std::uint64_t y = 0; y < (std::uint64_t(1) << n); ++y) {
      BitString yb(n);
      for (unsigned k = 0; k < n; ++k) {
        yb.set(k, (y >> k) & 1);
      }
      const BitString z = toeplitz_matvec(spec, seed, yb);
      std::uint64_t zv = 0;
      for (unsigned k = 0; k < u; ++k) {
        zv |= std::uint64_t(z.get(k)) << k;
      }
      out_prob[zv] += src.probs[y];
    }
    for (double p : out_prob) {
      total += std::abs(p / std::pow(2.0, d) - unif);
    }
  }
  return total / 2;
}

}  // namespace

TEST_CASE("SmallSource construction and min-entropy") {
  const SmallSource u = SmallSource::uniform(5);
  u.validate();
  CHECK(u.min_entropy() == doctest::Approx(5.0));
  Prng prng(1);
  for (int t = 0; t < 20; ++t) {
    const double h = 1.0 + 5.0 * prng.next_double();
    const SmallSource s = SmallSource::random_with_min_entropy(7, h, prng);
    s.validate();
    CHECK(s.min_entropy() >= h - 1e-9);
  }
}

TEST_CASE("uniform source: TVD equals the rank-deficiency expectation") {
  // Per seed the image of a uniform source is uniform on a rank(T_s)-
  // dimensional subspace, so TVD = E_s[1 - 2^{rank - u}]. The all-zero seed
  // alone keeps this strictly positive; it still sits far under the
  // leftover-hash bound (1/2) 2^{(u-n)/2}.
  const unsigned n = 6, d = 8, u = d - n + 1;
  const double tvd = tvd_strong_extractor(SmallSource::uniform(n), n, d);
  CHECK(tvd == doctest::Approx(tvd_oracle(SmallSource::uniform(n), n, d))
                   .epsilon(1e-10));

  const ToeplitzSpec spec{n, u};
  double expect = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << d); ++s) {
    BitString seed(d);
    for (unsigned k = 0; k < d; ++k) {
      seed.set(k, (s >> k) & 1);
    }
    // Row-space rank by eliminating the u packed rows.
    std::vector<std::uint64_t> rows(u);
    for (unsigned i = 0; i < u; ++i) {
      std::uint64_t r = 0;
      for (unsigned j = 0; j < n; ++j) {
        r |= std::uint64_t(seed.get(j + u - 1 - i)) << j;
      }
      rows[i] = r;
    }
    unsigned rank = 0;
    for (unsigned col = 0; col < n; ++col) {
      std::size_t pivot = rank;
      while (pivot < u && ((rows[pivot] >> col) & 1) == 0) {
        ++pivot;
      }
      if (pivot == u) {
        continue;
      }
      std::swap(rows[rank], rows[pivot]);
      for (unsigned i = 0; i < u; ++i) {
        if (i != rank && ((rows[i] >> col) & 1)) {
          rows[i] ^= rows[rank];
        }
      }
      ++rank;
    }
    expect += 1.0 - std::exp2(double(rank) - double(u));
  }
  expect /= double(std::uint64_t(1) << d);
  CHECK(tvd == doctest::Approx(expect).epsilon(1e-12));
  CHECK(tvd > 0.0);
  CHECK(tvd <= 0.5 * std::exp2((double(u) - double(n)) / 2.0));
}

TEST_CASE("tvd matches the quadratic oracle") {
  Prng prng(77);
  for (int t = 0; t < 5; ++t) {
    const SmallSource s = SmallSource::random_with_min_entropy(5, 2.5, prng);
    const double fast = tvd_strong_extractor(s, 5, 7);
    const double slow = tvd_oracle(s, 5, 7);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
  }
}

TEST_CASE("tvd is invariant under XOR relabeling of the source") {
  // Toeplitz maps are linear, so XORing every atom by a constant shifts each
  // seed's output distribution by a constant and leaves the TVD unchanged.
  Prng prng(88);
  const SmallSource s = SmallSource::random_with_min_entropy(6, 3.0, prng);
  SmallSource shifted = s;
  const std::uint64_t mask = 0x2b;
  for (std::uint64_t y = 0; y < 64; ++y) {
    shifted.probs[y ^ mask] = s.probs[y];
  }
  CHECK(tvd_strong_extractor(s, 6, 8) ==
        doctest::Approx(tvd_strong_extractor(shifted, 6, 8)).epsilon(1e-10));
}

TEST_CASE("leftover-hash bound holds on random sources") {
  // For every source with H_min >= k, the exact TVD must be within
  // (1/2) sqrt(2^{u - k}) where u = d - n + 1 output bits.
  Prng prng(5);
  for (int t = 0; t < 30; ++t) {
    const unsigned n = 5 + unsigned(prng.next_u64() % 3);  // 5..7
    const unsigned d = n + 2 + unsigned(prng.next_u64() % 3);
    const double k = 2.0 + (double(n) - 2.0) * prng.next_double();
    const SmallSource s = SmallSource::random_with_min_entropy(n, k, prng);
    const unsigned u = d - n + 1;
    const double bound = 0.5 * std::sqrt(std::pow(2.0, double(u) - k));
    CHECK(tvd_strong_extractor(s, n, d) <= bound + 1e-12);
  }
}

TEST_CASE("tvd refuses sizes it cannot enumerate") {
  CHECK_THROWS_AS(tvd_strong_extractor(SmallSource::uniform(13), 13, 14),
                  std::invalid_argument);
  CHECK_THROWS_AS(tvd_strong_extractor(SmallSource::uniform(8), 8, 17),
                  std::invalid_argument);
}

TEST_CASE("counterexample: identical block outputs, large exact TVD") {
  const CounterexampleReport rep = counterexample_demo(4, 2, 2000, 99);
  CHECK(rep.trials == 2000);
  CHECK(rep.identical_outputs == 2000);
  REQUIRE(rep.has_exact_tvd);
  // Far from uniform; in particular it beats the single-block bound
  // 2^{-(delta n + n - d - 1)/2} = 1/2 that would hold at n=4, d=5,
  // delta=1 if the second block were fresh entropy.
  CHECK(rep.exact_tvd > 0.1);
  CHECK(rep.exact_tvd > 0.5);
  CHECK(rep.exact_tvd ==
        doctest::Approx(counterexample_exact_tvd(4, 5)).epsilon(1e-12));
}

TEST_CASE("igamma_q against closed forms") {
  // Q(1, x) = exp(-x); Q(1/2, x) = erfc(sqrt(x)).
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.0}) {
    CHECK(igamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-10));
    CHECK(igamma_q(0.5, x) ==
          doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
  }
  // Q(a, 0) = 1.
  CHECK(igamma_q(3.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("monobit test behaviour") {
  CHECK_THROWS_AS(monobit_test(BitString(10), 0.01), std::invalid_argument);
  const BitString zeros(100000);
  const TestResult fail = monobit_test(zeros, 0.01);
  CHECK(!fail.pass);
  CHECK(fail.p_value < 1e-10);
  Prng prng(22);
  const TestResult ok = monobit_test(prng.next_bits(100000), 0.01);
  CHECK(ok.pass);
  CHECK(ok.p_value > 0.01);
}

TEST_CASE("block chi-square test behaviour") {
  Prng prng(23);
  const BitString good = prng.next_bits(200000);
  CHECK(block_chi2_test(good, 4, 0.01).pass);
  // Period-2 pattern: grossly non-uniform 4-bit blocks.
  BitString period(200000);
  for (std::size_t i = 0; i < period.size(); i += 2) {
    period.set(i, true);
  }
  CHECK(!block_chi2_test(period, 4, 0.01).pass);
  CHECK_THROWS_AS(block_chi2_test(good, 0, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(block_chi2_test(good, 17, 0.01), std::invalid_argument);
  // Too few blocks for the expected-count floor.
  CHECK_THROWS_AS(block_chi2_test(prng.next_bits(64), 4, 0.01),
                  std::invalid_argument);
}

TEST_CASE("monobit p-values are roughly uniform on honest input") {
  Prng prng(24);
  int low = 0;
  const int reps = 200;
  for (int t = 0; t < reps; ++t) {
    if (monobit_test(prng.next_bits(20000), 0.01).p_value < 0.1) {
      ++low;
    }
  }
  // ~10% expected; allow a wide band.
  CHECK(low > 5);
  CHECK(low < 45);
}

TEST_CASE("selftest battery passes and reports lines") {
  std::ostringstream os;
  CHECK(run_selftest(os));
  CHECK(os.str().find("=pass") != std::string::npos);
  CHECK(os.str().find("=fail") == std::string::npos);
}
