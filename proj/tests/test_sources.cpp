#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "rbext/entropy.hpp"
#include "rbext/sources.hpp"
#include "rbext/verify.hpp"

using namespace rbext;

namespace {

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) {
    s += x;
  }
  return s / double(xs.size());
}

double lag1_corr(const std::vector<double>& xs) {
  const double mu = mean(xs);
  double c0 = 0, c1 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c0 += (xs[i] - mu) * (xs[i] - mu);
    if (i + 1 < xs.size()) {
      c1 += (xs[i] - mu) * (xs[i + 1] - mu);
    }
  }
  return c1 / c0;
}

HomodyneModel iid_model() {
  return HomodyneModel{1.0, 1.0, 0.1, 8, 4.0};
}

}  // namespace

TEST_CASE("Prng gaussian moments and determinism") {
  Prng a(123);
  Prng b(123);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a.next_gaussian() == b.next_gaussian());
  }
  Prng c(9);
  std::vector<double> xs(1000000);
  for (auto& x : xs) {
    x = c.next_gaussian();
  }
  CHECK(std::abs(mean(xs)) < 0.005);
  double var = 0;
  for (double x : xs) {
    var += x * x;
  }
  CHECK(var / double(xs.size()) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("SimSourceParams: phi from the model, mismatch rejected") {
  HomodyneModel m{2.0, 1.0, 0.1, 8, 4.0};
  SimSourceParams p = SimSourceParams::from_model(m, 1);
  CHECK(p.phi == doctest::Approx(std::sqrt(0.5)));
  p.validate();
  p.phi = 0.9;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("phi = 0 gives i.i.d. samples with the stationary variance") {
  const auto params = SimSourceParams::from_model(iid_model(), 7);
  CHECK(params.phi == doctest::Approx(0.0));
  HomodyneSimulator sim(params);
  const std::vector<double> xs = sim.generate_analog(1000000);
  CHECK(std::abs(mean(xs)) < 0.01);
  double var = 0;
  for (double x : xs) {
    var += x * x;
  }
  CHECK(var / double(xs.size()) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(lag1_corr(xs)) < 3.0 / std::sqrt(double(xs.size())));
}

TEST_CASE("AR(1) simulator hits its configured autocorrelation") {
  HomodyneModel m{2.0, 1.0, 0.1, 8, 6.0};
  const auto params = SimSourceParams::from_model(m, 99);
  HomodyneSimulator sim(params);
  const std::vector<double> xs = sim.generate_analog(1000000);
  CHECK(lag1_corr(xs) == doctest::Approx(params.phi).epsilon(0.02));
  double var = 0;
  const double mu = mean(xs);
  for (double x : xs) {
    var += (x - mu) * (x - mu);
  }
  CHECK(var / double(xs.size()) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("simulator determinism and sample/bit agreement") {
  const auto params = SimSourceParams::from_model(iid_model(), 42);
  HomodyneSimulator s1(params);
  HomodyneSimulator s2(params);
  const auto a = s1.generate(5000);
  const auto b = s2.generate(5000);
  REQUIRE(a == b);
  HomodyneSimulator s3(params);
  const BitString bits = s3.generate_bits(5000);
  REQUIRE(bits.size() == 5000 * 8);
  for (std::size_t i = 0; i < 5000; ++i) {
    std::uint32_t v = 0;
    for (unsigned k = 0; k < 8; ++k) {
      v |= std::uint32_t(bits.get(i * 8 + k)) << k;
    }
    REQUIRE(v == a[i] - 1);  // level j stored as code j-1
    REQUIRE(a[i] >= 1);
    REQUIRE(a[i] <= 256);
  }
}

TEST_CASE("quantize -> dequantize -> fit recovers the model variances") {
  HomodyneModel m{2.0, 1.0, 0.1, 12, 8.0};
  const auto params = SimSourceParams::from_model(m, 2718);
  HomodyneSimulator sim(params);
  const auto codes = sim.generate(1000000);
  std::vector<double> volts(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    volts[i] = adc_dequantize(codes[i], m.b, m.R);
  }
  const Ar1Fit f = fit_ar1(volts);
  CHECK(f.var_x == doctest::Approx(m.var_x).epsilon(0.05));
  CHECK(f.sigma_x2 == doctest::Approx(m.sigma_x2).epsilon(0.05));
  CHECK(f.phi == doctest::Approx(params.phi).epsilon(0.05));
}

TEST_CASE("duplicate-halves source repeats its first half") {
  const std::size_t half = 1000000;
  const BitString s = duplicate_halves_source(half, 17);
  REQUIRE(s.size() == 2 * half);
  CHECK(s.slice(0, half) == s.slice(half, half));
  // The first half on its own is honest uniform randomness.
  const TestResult mono = monobit_test(s.slice(0, half), 0.01);
  CHECK(mono.pass);
}

TEST_CASE("adversarial source: mixture weight and half-space structure") {
  const unsigned b = 3;
  const std::size_t N = 4;
  const double delta = 0.4;
  const unsigned pivot = 5;  // bit 5 of the 12-bit concatenation
  const auto draws = sv_adversarial_source(b, N, delta, pivot, 404);
  // One call returns one draw of N samples; take many draws.
  std::size_t in_half = 0;
  const std::size_t trials = 200000;
  std::map<std::uint64_t, std::size_t> counts;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = sv_adversarial_source(b, N, delta, pivot, 1000 + t);
    REQUIRE(x.size() == N);
    std::uint64_t packed = 0;
    for (std::size_t i = 0; i < N; ++i) {
      REQUIRE(x[i] < (1u << b));
      packed |= std::uint64_t(x[i]) << (b * i);
    }
    in_half += (packed >> pivot) & 1;
    ++counts[packed];
  }
  (void)draws;
  // Pivot-bit frequency ~ 2^-delta within 4 sigma.
  const double p = std::pow(2.0, -delta);
  const double sigma = std::sqrt(p * (1 - p) / double(trials));
  CHECK(std::abs(double(in_half) / double(trials) - p) < 4 * sigma);
  // Within each half the distribution is uniform: every atom probability is
  // at most 2^-delta / 2^(bN - 1), i.e. min-entropy >= delta + bN - 1
  // >= delta * bN for these sizes. Check the empirical max probability.
  double max_p = 0;
  for (const auto& [atom, cnt] : counts) {
    max_p = std::max(max_p, double(cnt) / double(trials));
  }
  const double atom_bound = p / std::pow(2.0, b * double(N) - 1);
  CHECK(max_p < atom_bound * 1.5);
}

TEST_CASE("adversarial source at delta -> 1 approaches uniform") {
  const std::size_t trials = 100000;
  std::size_t in_half = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = sv_adversarial_source(2, 2, 0.999999, 1, 7000 + t);
    std::uint64_t packed = std::uint64_t(x[0]) | (std::uint64_t(x[1]) << 2);
    in_half += (packed >> 1) & 1;
  }
  CHECK(double(in_half) / double(trials) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("adversarial source input validation") {
  CHECK_THROWS_AS(sv_adversarial_source(32, 2, 0.5, 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(sv_adversarial_source(4, 2, 0.0, 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(sv_adversarial_source(4, 2, 1.5, 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(sv_adversarial_source(4, 2, 0.5, 8, 1),
                  std::invalid_argument);  // pivot outside b*N bits
}
