#include "rbext/verify.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "rbext/gadget.hpp"
#include "rbext/toeplitz.hpp"

namespace rbext {

namespace {

// Columns of T_s as u-bit words: col[0] is the reversed low-u seed window,
// col[j+1] = (col[j] << 1) | s_{u+j}, all masked to u bits.
void build_columns(std::uint32_t seed_bits, unsigned u, unsigned n,
                   std::uint32_t* cols) {
  auto seed_bit = [&](unsigned k) -> std::uint32_t {
    return (seed_bits >> k) & 1u;
  };
  const std::uint32_t mask =
      u == 32 ? 0xffffffffu : ((std::uint32_t(1) << u) - 1);
  std::uint32_t col = 0;
  for (unsigned i = 0; i < u; ++i) {
    col |= seed_bit(u - 1 - i) << i;
  }
  cols[0] = col;
  for (unsigned j = 1; j < n; ++j) {
    col = ((col << 1) & mask) | seed_bit(u - 1 + j);
    cols[j] = col;
  }
}

void check_oracle_size(const SmallSource& source, unsigned n, unsigned d) {
  if (source.n != n) {
    throw std::invalid_argument("tvd oracle: source width must equal n");
  }
  if (n < 1 || n > 12 || d < n || d > 16) {
    throw std::invalid_argument(
        "tvd oracle: exhaustive enumeration limited to 1 <= n <= 12, "
        "n <= d <= 16");
  }
  source.validate();
}

}  // namespace

SmallSource SmallSource::uniform(unsigned n) {
  SmallSource s;
  s.n = n;
  s.probs.assign(std::size_t(1) << n, 1.0 / double(std::size_t(1) << n));
  return s;
}

SmallSource SmallSource::random_with_min_entropy(unsigned n, double hmin_bits,
                                                 Prng& prng) {
  if (hmin_bits > n) {
    throw std::invalid_argument("random_with_min_entropy: hmin_bits > n");
  }
  const std::size_t size = std::size_t(1) << n;
  // Cap slightly below 2^{-hmin} so float drift cannot push the exact
  // min-entropy under the requested floor.
  const double pmax = std::exp2(-hmin_bits) * (1.0 - 1e-9);
  SmallSource s;
  s.n = n;
  s.probs.resize(size);
  double sum = 0;
  for (double& p : s.probs) {
    p = -std::log(1.0 - prng.next_double());
    sum += p;
  }
  for (double& p : s.probs) {
    p /= sum;
  }
  // Water-filling: clip to the cap and push the excess into remaining
  // headroom until the cap holds.
  for (int iter = 0; iter < 200; ++iter) {
    double excess = 0;
    double headroom = 0;
    for (double& p : s.probs) {
      if (p > pmax) {
        excess += p - pmax;
        p = pmax;
      } else {
        headroom += pmax - p;
      }
    }
    if (excess <= 0 || headroom <= 0) {
      break;
    }
    const double scale = excess / headroom;
    for (double& p : s.probs) {
      if (p < pmax) {
        p += (pmax - p) * scale;
      }
    }
  }
  double total = 0;
  for (double p : s.probs) {
    total += p;
  }
  for (double& p : s.probs) {
    p /= total;
  }
  return s;
}

void SmallSource::validate() const {
  if (probs.size() != (std::size_t(1) << n)) {
    throw std::invalid_argument("SmallSource: probs must have 2^n entries");
  }
  double sum = 0;
  for (double p : probs) {
    if (p < 0) {
      throw std::invalid_argument("SmallSource: negative probability");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("SmallSource: probabilities must sum to 1");
  }
}

double SmallSource::min_entropy() const {
  double pmax = 0;
  for (double p : probs) {
    pmax = std::max(pmax, p);
  }
  return -std::log2(pmax);
}

double tvd_strong_extractor(const SmallSource& source, unsigned n, unsigned d) {
  check_oracle_size(source, n, d);
  const unsigned u = d - n + 1;
  const std::size_t num_seeds = std::size_t(1) << d;
  const std::size_t num_atoms = std::size_t(1) << n;
  const std::size_t out_size = std::size_t(1) << u;
  const double unif = 1.0 / double(out_size);
  const double* probs = source.probs.data();

  double total = 0;
#pragma omp parallel reduction(+ : total)
  {
    std::vector<std::uint32_t> cols(n);
    std::vector<std::uint32_t> z(num_atoms);
    std::vector<double> acc(out_size);
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < std::int64_t(num_seeds); ++s) {
      build_columns(static_cast<std::uint32_t>(s), u, n, cols.data());
      std::memset(acc.data(), 0, out_size * sizeof(double));
      z[0] = 0;
      acc[0] = probs[0];
      for (std::size_t y = 1; y < num_atoms; ++y) {
        const std::uint32_t zz =
            z[y & (y - 1)] ^ cols[std::countr_zero(y)];
        z[y] = zz;
        acc[zz] += probs[y];
      }
      double dist = 0;
      for (std::size_t k = 0; k < out_size; ++k) {
        dist += std::fabs(acc[k] - unif);
      }
      total += 0.5 * dist;
    }
  }
  return total / double(num_seeds);
}

double counterexample_exact_tvd(unsigned n, unsigned d) {
  check_oracle_size(SmallSource::uniform(n), n, d);
  const unsigned u = d - n + 1;
  if (2 * u + d > 40) {
    throw std::invalid_argument("counterexample_exact_tvd: shape too large");
  }
  const std::size_t num_seeds = std::size_t(1) << d;
  const std::size_t num_atoms = std::size_t(1) << n;
  const std::size_t out_size = std::size_t(1) << u;
  // Joint over ((z, z), s) with z = T_s y, y uniform; uniform reference is
  // over 2u + d bits.
  const double unif_pair = 1.0 / double(out_size * out_size);
  const double py = 1.0 / double(num_atoms);

  double total = 0;
  std::vector<std::uint32_t> cols(n);
  std::vector<std::uint32_t> z(num_atoms);
  std::vector<double> acc(out_size);
  for (std::size_t s = 0; s < num_seeds; ++s) {
    build_columns(static_cast<std::uint32_t>(s), u, n, cols.data());
    std::fill(acc.begin(), acc.end(), 0.0);
    z[0] = 0;
    acc[0] = py;
    for (std::size_t y = 1; y < num_atoms; ++y) {
      const std::uint32_t zz = z[y & (y - 1)] ^ cols[std::countr_zero(y)];
      z[y] = zz;
      acc[zz] += py;
    }
    double dist = 0;
    for (std::size_t k = 0; k < out_size; ++k) {
      dist += std::fabs(acc[k] - unif_pair);  // diagonal cells (z, z)
    }
    dist += double(out_size * out_size - out_size) * unif_pair;  // off-diagonal
    total += 0.5 * dist;
  }
  return total / double(num_seeds);
}

CounterexampleReport counterexample_demo(std::size_t half_len_bits,
                                         std::size_t out_len,
                                         std::size_t trials,
                                         std::uint64_t prng_seed) {
  if (out_len < 1 || half_len_bits < 1) {
    throw std::invalid_argument("counterexample_demo: bad shape");
  }
  const ToeplitzSpec spec{half_len_bits, out_len};
  Prng prng(prng_seed);
  CounterexampleReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const BitString seed = prng.next_bits(spec.seed_len());
    const BitString data = duplicate_halves_source(half_len_bits, prng.next_u64());
    const BitString r1 = toeplitz_matvec_packed(
        spec, seed, data.slice(0, half_len_bits));
    const BitString r2 = toeplitz_matvec_packed(
        spec, seed, data.slice(half_len_bits, half_len_bits));
    if (r1 == r2) {
      ++report.identical_outputs;
    }
  }
  const unsigned n = static_cast<unsigned>(half_len_bits);
  const unsigned d = static_cast<unsigned>(half_len_bits + out_len - 1);
  if (n <= 12 && d <= 16 && d >= n && 2 * (d - n + 1) + d <= 40) {
    report.has_exact_tvd = true;
    report.exact_tvd = counterexample_exact_tvd(n, d);
  }
  return report;
}

// Regularized incomplete gamma, series + continued fraction split at x = a+1.
double igamma_q(double a, double x) {
  if (a <= 0 || x < 0) {
    throw std::invalid_argument("igamma_q: requires a > 0, x >= 0");
  }
  if (x == 0) {
    return 1.0;
  }
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) {
        break;
      }
    }
    const double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  double b = x + 1.0 - a;
  double c = 1e308;
  double dd = 1.0 / b;
  double h = dd;
  for (int i = 1; i < 1000; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    dd = an * dd + b;
    if (std::fabs(dd) < 1e-300) {
      dd = 1e-300;
    }
    c = b + an / c;
    if (std::fabs(c) < 1e-300) {
      c = 1e-300;
    }
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) {
      break;
    }
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

TestResult monobit_test(const BitString& bits, double alpha) {
  if (bits.size() < 100) {
    throw std::invalid_argument("monobit_test: need at least 100 bits");
  }
  const double n = static_cast<double>(bits.size());
  const double ones = static_cast<double>(bits.count_ones());
  const double s_obs = std::fabs(2.0 * ones - n) / std::sqrt(n);
  TestResult r;
  r.statistic = s_obs;
  r.p_value = std::erfc(s_obs / std::sqrt(2.0));
  r.pass = r.p_value >= alpha;
  return r;
}

TestResult block_chi2_test(const BitString& bits, unsigned block_len,
                           double alpha) {
  if (block_len < 1 || block_len > 16) {
    throw std::invalid_argument("block_chi2_test: block_len must be in [1,16]");
  }
  const std::size_t cells = std::size_t(1) << block_len;
  const std::size_t blocks = bits.size() / block_len;
  const double expected = static_cast<double>(blocks) / double(cells);
  if (expected < 5.0) {
    throw std::invalid_argument(
        "block_chi2_test: need at least 5 expected counts per cell");
  }
  std::vector<std::uint64_t> counts(cells, 0);
  std::uint64_t word = 0;
  for (std::size_t k = 0; k < blocks; ++k) {
    bits.extract_words(k * block_len, block_len, &word);
    ++counts[word];
  }
  double chi2 = 0;
  for (std::uint64_t c : counts) {
    const double diff = static_cast<double>(c) - expected;
    chi2 += diff * diff / expected;
  }
  TestResult r;
  r.statistic = chi2;
  r.p_value = igamma_q(double(cells - 1) / 2.0, chi2 / 2.0);
  r.pass = r.p_value >= alpha;
  return r;
}

bool run_selftest(std::ostream& out) {
  bool all = true;
  auto report = [&](const char* name, bool ok) {
    out << name << "=" << (ok ? "pass" : "FAIL") << "\n";
    all = all && ok;
  };
  Prng prng(0x5e1f7e57u);

  // Packed and reference Toeplitz paths agree on random shapes.
  {
    bool ok = true;
    for (int t = 0; t < 200 && ok; ++t) {
      const std::size_t u = 1 + prng.next_u64() % 40;
      const std::size_t n = 1 + prng.next_u64() % 96;
      const ToeplitzSpec spec{n, u};
      const BitString seed = prng.next_bits(spec.seed_len());
      const BitString input = prng.next_bits(n);
      const BitString a = toeplitz_matvec(spec, seed, input);
      const BitString b = toeplitz_matvec_packed(spec, seed, input);
      const BitString c = ToeplitzKernel(spec, seed).apply(input);
      ok = a == b && a == c;
    }
    report("toeplitz_paths_agree", ok);
  }
  // A uniform source is mapped exactly as rank deficiency dictates: per seed
  // the output is uniform on the image of T_s, so the seed-averaged TVD is
  // E_s[1 - 2^{rank(T_s) - u}]. Checked against an independent GF(2)
  // elimination; in particular the all-zero seed makes the TVD nonzero.
  {
    const unsigned n = 6, d = 8, u = d - n + 1;
    const double tvd = tvd_strong_extractor(SmallSource::uniform(n), n, d);
    double expect = 0;
    std::uint32_t cols[64];
    for (std::uint32_t s = 0; s < (1u << d); ++s) {
      build_columns(s, u, n, cols);
      std::uint32_t basis[32] = {};
      unsigned rank = 0;
      for (unsigned j = 0; j < n; ++j) {
        std::uint32_t v = cols[j];
        while (v != 0) {
          const unsigned lead = 31u - unsigned(std::countl_zero(v));
          if (basis[lead] == 0) {
            basis[lead] = v;
            ++rank;
            break;
          }
          v ^= basis[lead];
        }
      }
      expect += 1.0 - std::exp2(double(rank) - double(u));
    }
    expect /= double(1u << d);
    report("uniform_source_tvd_rank_identity", std::fabs(tvd - expect) < 1e-12);
  }
  // The leftover-hash bound holds on random constrained sources.
  {
    bool ok = true;
    for (int t = 0; t < 10 && ok; ++t) {
      const unsigned n = 4 + static_cast<unsigned>(prng.next_u64() % 5);
      const unsigned d = n + static_cast<unsigned>(prng.next_u64() % 4);
      const double delta = 0.5;
      SmallSource src =
          SmallSource::random_with_min_entropy(n, delta * n, prng);
      const double bound =
          std::exp2(-(delta * n + n - double(d) - 1.0) / 2.0);
      ok = tvd_strong_extractor(src, n, d) <= bound;
    }
    report("leftover_hash_bound", ok);
  }
  // Duplicate-halves counterexample: replicated blocks, TVD far from 0.
  {
    const CounterexampleReport rep = counterexample_demo(4, 2, 100, 7);
    report("counterexample_blocks_identical",
           rep.identical_outputs == rep.trials);
    report("counterexample_tvd_large",
           rep.has_exact_tvd && rep.exact_tvd > 0.1);
  }
  // Statistical tests: PRNG calibrates, degenerate input fails.
  {
    const BitString good = prng.next_bits(100000);
    const BitString zeros(100000);
    report("monobit_prng_passes", monobit_test(good, 0.01).pass);
    report("monobit_zeros_fails", !monobit_test(zeros, 0.01).pass);
    report("chi2_prng_passes", block_chi2_test(good, 8, 0.01).pass);
    report("chi2_zeros_fails", !block_chi2_test(zeros, 8, 0.01).pass);
  }
  return all;
}

}  // namespace rbext
