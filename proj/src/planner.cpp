#include "rbext/planner.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace rbext {

namespace {

// Validated up to this block index at plan time; r_len is nondecreasing for
// the Toeplitz gadget, but the rounded parameters are checked directly.
constexpr std::uint64_t kNeqValidationSpan = 10000;

long double delta_bits(const Rational& delta, unsigned b, std::uint64_t n) {
  return static_cast<long double>(delta.num) * b * n / delta.den;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw PlanError("plan text: malformed line: " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw PlanError("plan text: missing key: " + key);
  }
  return it->second;
}

}  // namespace

EqPlan plan_eq(unsigned b, std::uint64_t N, Rational delta, double eps_log2,
               long double eps_s) {
  delta.validate_rate();
  if (b < 1) {
    throw PlanError("plan_eq: b must be >= 1");
  }
  if (N < 1) {
    throw PlanError("plan_eq: N must be >= 1");
  }
  if (!(eps_log2 < 0)) {
    throw PlanError("plan_eq: eps must satisfy 0 < eps < 1 (eps_log2 < 0)");
  }
  if (eps_s < 0) {
    throw PlanError("plan_eq: eps_s must be >= 0");
  }

  // n = ceil((4/(delta b)) * log2(N/eps)); log base 2 reproduces the
  // reference parameter set exactly.
  const long double t =
      std::log2(static_cast<long double>(N)) - static_cast<long double>(eps_log2);
  std::uint64_t n = static_cast<std::uint64_t>(
      std::ceil(4.0L * delta.den * t / (static_cast<long double>(delta.num) * b)));
  if (n < 1) {
    n = 1;
  }

  // If integer rounding of d pushed the accumulated error over eps, grow n
  // until the whole-stream budget holds with the recomputed gadget eps.
  for (;; ++n) {
    if (n > N) {
      throw PlanError("plan_eq: infeasible, raw data shorter than one block");
    }
    GadgetParams g = make_gadget_params(static_cast<std::size_t>(b) * n, delta);
    if (g.eps >= 1.0L) {
      throw PlanError("plan_eq: degenerate plan, gadget error >= 1");
    }
    const std::uint64_t num_blocks = N / n;
    const long double total_log2 =
        std::log2(static_cast<long double>(num_blocks)) + g.eps_log2;
    if (total_log2 > static_cast<long double>(eps_log2)) {
      continue;
    }
    EqPlan plan;
    plan.b = b;
    plan.N = N;
    plan.delta = delta;
    plan.eps_log2 = eps_log2;
    plan.eps_s = eps_s;
    plan.n = static_cast<std::size_t>(n);
    plan.block_bits = static_cast<std::size_t>(b) * plan.n;
    plan.gadget = g;
    plan.r_per_block = g.m - g.d;
    plan.num_blocks = num_blocks;
    plan.total_output_bits = num_blocks * plan.r_per_block;
    plan.total_error_log2 = total_log2;
    plan.total_error_bound =
        static_cast<long double>(num_blocks) * g.eps + 2 * eps_s;
    return plan;
  }
}

std::size_t NeqPlan::block_samples(std::uint64_t ell) const {
  return n1 + static_cast<std::size_t>(ell - 1) * Delta;
}

GadgetParams NeqPlan::gadget_at(std::uint64_t ell) const {
  return make_gadget_params(static_cast<std::size_t>(b) * block_samples(ell),
                            delta);
}

std::size_t NeqPlan::r_len(std::uint64_t ell) const {
  const GadgetParams cur = gadget_at(ell);
  const GadgetParams next = gadget_at(ell + 1);
  if (next.d >= cur.m) {
    return 0;
  }
  return cur.m - next.d;
}

std::size_t NeqPlan::seed_len(std::uint64_t ell) const {
  return gadget_at(ell).d;
}

NeqPlan plan_neq(unsigned b, Rational delta, std::size_t n1, std::size_t Delta,
                 long double eps_s) {
  delta.validate_rate();
  if (b < 1) {
    throw PlanError("plan_neq: b must be >= 1");
  }
  if (n1 < 1) {
    throw PlanError("plan_neq: n1 must be >= 1");
  }
  if (Delta < 1) {
    throw PlanError("plan_neq: Delta must be >= 1, the error series diverges");
  }
  if (eps_s < 0) {
    throw PlanError("plan_neq: eps_s must be >= 0");
  }

  NeqPlan plan;
  plan.b = b;
  plan.delta = delta;
  plan.eps_s = eps_s;
  plan.n1 = n1;
  plan.Delta = Delta;

  for (std::uint64_t ell = 1; ell <= kNeqValidationSpan; ++ell) {
    if (plan.r_len(ell) < 1) {
      throw PlanError("plan_neq: infeasible, block " + std::to_string(ell) +
                      " would emit no bits; increase n1");
    }
    if (plan.block_samples(ell) > plan.max_block_samples) {
      break;  // later blocks are never reached
    }
  }

  const long double head = std::exp2(-delta_bits(delta, b, n1) / 4.0L);
  const long double ratio = std::exp2(-delta_bits(delta, b, Delta) / 4.0L);
  plan.error_bound = head / (1.0L - ratio) + 2 * eps_s;
  return plan;
}

long double neq_error_after_k(const NeqPlan& plan, std::uint64_t k) {
  long double sum = 0;
  for (std::uint64_t ell = 1; ell <= k; ++ell) {
    const long double term = std::exp2(
        -delta_bits(plan.delta, plan.b, plan.block_samples(ell)) / 4.0L);
    sum += term;
    if (term == 0.0L) {
      break;
    }
  }
  return sum + 2 * plan.eps_s;
}

std::string to_text(const EqPlan& plan) {
  std::ostringstream out;
  out.precision(21);
  out << "mode=eq\n"
      << "b=" << plan.b << "\n"
      << "N=" << plan.N << "\n"
      << "delta=" << plan.delta.str() << "\n"
      << "eps_log2=" << plan.eps_log2 << "\n"
      << "eps_s=" << plan.eps_s << "\n"
      << "n=" << plan.n << "\n"
      << "block_bits=" << plan.block_bits << "\n"
      << "d=" << plan.gadget.d << "\n"
      << "m=" << plan.gadget.m << "\n"
      << "r_per_block=" << plan.r_per_block << "\n"
      << "num_blocks=" << plan.num_blocks << "\n"
      << "total_output_bits=" << plan.total_output_bits << "\n"
      << "error_bound_log2=" << plan.total_error_log2 << "\n";
  return out.str();
}

std::string to_text(const NeqPlan& plan) {
  std::ostringstream out;
  out.precision(21);
  out << "mode=neq\n"
      << "b=" << plan.b << "\n"
      << "delta=" << plan.delta.str() << "\n"
      << "eps_s=" << plan.eps_s << "\n"
      << "n1=" << plan.n1 << "\n"
      << "Delta=" << plan.Delta << "\n"
      << "max_block_samples=" << plan.max_block_samples << "\n"
      << "d1=" << plan.seed_len(1) << "\n"
      << "error_bound=" << plan.error_bound << "\n";
  return out.str();
}

Plan parse_plan_text(const std::string& text) {
  const auto kv = parse_kv(text);
  const std::string mode = require(kv, "mode");
  const Rational delta = Rational::parse(require(kv, "delta"));
  const unsigned b = static_cast<unsigned>(std::stoul(require(kv, "b")));
  const long double eps_s = std::strtold(require(kv, "eps_s").c_str(), nullptr);
  if (mode == "eq") {
    const std::uint64_t N = std::stoull(require(kv, "N"));
    const double eps_log2 = std::stod(require(kv, "eps_log2"));
    EqPlan plan = plan_eq(b, N, delta, eps_log2, eps_s);
    // Derived fields in the file must match the re-derivation; a stale or
    // hand-edited plan is rejected rather than silently recomputed.
    if (std::stoull(require(kv, "n")) != plan.n ||
        std::stoull(require(kv, "d")) != plan.gadget.d ||
        std::stoull(require(kv, "r_per_block")) != plan.r_per_block) {
      throw PlanError("plan text: derived fields disagree with inputs");
    }
    return plan;
  }
  if (mode == "neq") {
    const std::size_t n1 = std::stoull(require(kv, "n1"));
    const std::size_t Delta = std::stoull(require(kv, "Delta"));
    NeqPlan plan = plan_neq(b, delta, n1, Delta, eps_s);
    if (auto it = kv.find("max_block_samples"); it != kv.end()) {
      plan.max_block_samples = std::stoull(it->second);
    }
    if (std::stoull(require(kv, "d1")) != plan.seed_len(1)) {
      throw PlanError("plan text: derived fields disagree with inputs");
    }
    return plan;
  }
  throw PlanError("plan text: unknown mode: " + mode);
}

}  // namespace rbext
