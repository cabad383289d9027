#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rbext/bitstring.hpp"
#include "rbext/sources.hpp"

namespace rbext {

// Fully tabulated distribution over {0,1}^n, small enough for exhaustive
// security checks.
struct SmallSource {
  unsigned n = 0;
  std::vector<double> probs;  // 2^n entries

  static SmallSource uniform(unsigned n);
  // Random distribution with exact min-entropy >= hmin_bits (max probability
  // capped at 2^{-hmin_bits}).
  static SmallSource random_with_min_entropy(unsigned n, double hmin_bits,
                                             Prng& prng);

  void validate() const;
  double min_entropy() const;  // -log2 max(probs)
};

// Exact total variation distance between the seed-averaged joint
// distribution (Ext_T(Y, S), S) and uniform, enumerated over all 2^d seeds
// and all source atoms. Sizes beyond n <= 12, d <= 16 are refused, never
// approximated.
double tvd_strong_extractor(const SmallSource& source, unsigned n, unsigned d);

// Exact TVD of the naive two-block same-seed pipeline over the
// duplicate-halves source: Y uniform on n bits, both blocks equal Y, both
// extracted with the same d-bit seed, joint with the seed.
double counterexample_exact_tvd(unsigned n, unsigned d);

struct CounterexampleReport {
  std::size_t trials = 0;
  std::size_t identical_outputs = 0;  // always equals trials
  bool has_exact_tvd = false;
  double exact_tvd = 0;
};

// Same-seed block-wise extraction over the duplicate-halves source: the two
// block outputs are replicas for every seed and draw. Small shapes also get
// the exact TVD.
CounterexampleReport counterexample_demo(std::size_t half_len_bits,
                                         std::size_t out_len,
                                         std::size_t trials,
                                         std::uint64_t prng_seed);

// Advisory statistical sanity checks on extracted output; they cannot
// certify entropy, the security statement is the planner's bound.
struct TestResult {
  bool pass = false;
  double p_value = 0;
  double statistic = 0;
};

TestResult monobit_test(const BitString& bits, double alpha);
TestResult block_chi2_test(const BitString& bits, unsigned block_len,
                           double alpha);

// Regularized upper incomplete gamma Q(a, x); exposed for the test suites.
double igamma_q(double a, double x);

// Full oracle battery; one machine-readable pass/fail line per check.
bool run_selftest(std::ostream& out);

}  // namespace rbext
