#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "rbext/gadget.hpp"

namespace rbext {

// Equal-block plan: n = ceil((4/(delta b)) log2(N/eps)) samples per block,
// one gadget instance shared by every block, total error bound
// num_blocks * gadget.eps + 2 eps_s <= eps + 2 eps_s.
struct EqPlan {
  unsigned b = 0;                 // bits per sample
  std::uint64_t N = 0;            // total samples
  Rational delta;                 // min-entropy rate
  double eps_log2 = 0;            // target error, as log2
  long double eps_s = 0;          // smoothing parameter
  std::size_t n = 0;              // samples per block
  std::size_t block_bits = 0;     // b * n
  GadgetParams gadget;            // for n_bits = b * n
  std::size_t r_per_block = 0;    // m - d
  std::uint64_t num_blocks = 0;   // floor(N / n)
  std::uint64_t total_output_bits = 0;
  long double total_error_bound = 0;
  long double total_error_log2 = 0;
};

// Incremental-block plan: block lengths n_l = n1 + (l-1)*Delta, seed of
// d_{b n1} bits, error bound 2^{-delta b n1/4}/(1 - 2^{-delta b Delta/4}).
struct NeqPlan {
  unsigned b = 0;
  Rational delta;
  long double eps_s = 0;
  std::size_t n1 = 0;
  std::size_t Delta = 0;
  long double error_bound = 0;
  std::size_t max_block_samples = std::size_t(1) << 20;

  std::size_t block_samples(std::uint64_t ell) const;  // n_l, 1-based
  GadgetParams gadget_at(std::uint64_t ell) const;
  // Emitted bits of block l: m_{b n_l} - d_{b n_{l+1}}.
  std::size_t r_len(std::uint64_t ell) const;
  // Seed length consumed by block l: d_{b n_l}.
  std::size_t seed_len(std::uint64_t ell) const;
};

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

EqPlan plan_eq(unsigned b, std::uint64_t N, Rational delta, double eps_log2,
               long double eps_s = 0);
NeqPlan plan_neq(unsigned b, Rational delta, std::size_t n1, std::size_t Delta,
                 long double eps_s = 0);

// Partial error budget after k blocks: sum_{l=1}^{k} 2^{-delta b n_l/4}
// + 2 eps_s. Monotone in k and bounded by plan.error_bound.
long double neq_error_after_k(const NeqPlan& plan, std::uint64_t k);

// key=value text block, consumed by the CLI's extract command.
std::string to_text(const EqPlan& plan);
std::string to_text(const NeqPlan& plan);
using Plan = std::variant<EqPlan, NeqPlan>;
Plan parse_plan_text(const std::string& text);

}  // namespace rbext
