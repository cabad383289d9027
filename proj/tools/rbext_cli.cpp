// rbext: streaming randomness extraction for reverse block sources.
//
// Subcommands: plan, extract, entropy, simulate, check, bench, selftest,
// gen-test-seed. Diagnostics go to stderr, data to files or stdout; exit
// code 0 iff the command's contract was fully satisfied.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbext/entropy.hpp"
#include "rbext/planner.hpp"
#include "rbext/sources.hpp"
#include "rbext/stream.hpp"
#include "rbext/verify.hpp"

namespace {

using namespace rbext;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  // Stage next to the target so a failure never leaves a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed: " + path);
    }
  }
  std::filesystem::rename(tmp, path);
}

BitString read_bits(const std::string& path) {
  const auto bytes = read_file(path);
  return BitString::from_bytes(bytes, bytes.size() * 8);
}

struct PlanArgs {
  std::string mode = "eq";
  unsigned b = 16;
  std::uint64_t N = 0;
  std::string delta = "1074/1600";
  double eps_log2 = -30;
  double eps_s_log2 = 0;  // 0 means eps_s = 0
  std::size_t n1 = 0;
  std::size_t Delta = 1;
  std::size_t max_block_samples = std::size_t(1) << 20;

  long double eps_s() const {
    return eps_s_log2 == 0 ? 0.0L : std::exp2((long double)eps_s_log2);
  }
};

void add_plan_flags(CLI::App* cmd, PlanArgs& args) {
  cmd->add_option("--mode", args.mode, "eq or neq")
      ->check(CLI::IsMember({"eq", "neq"}));
  cmd->add_option("--b", args.b, "bits per sample");
  cmd->add_option("--N", args.N, "total samples (eq)");
  cmd->add_option("--delta", args.delta,
                  "min-entropy rate as exact rational num/den");
  cmd->add_option("--eps-log2", args.eps_log2, "log2 of the target error");
  cmd->add_option("--eps-s-log2", args.eps_s_log2,
                  "log2 of the smoothing parameter (omit for 0)");
  cmd->add_option("--n1", args.n1, "first block length in samples (neq)");
  cmd->add_option("--Delta", args.Delta, "block length increment (neq)");
  cmd->add_option("--max-block-samples", args.max_block_samples,
                  "neq block growth cap");
}

Plan build_plan(const PlanArgs& args) {
  const Rational delta = Rational::parse(args.delta);
  if (args.mode == "eq") {
    return plan_eq(args.b, args.N, delta, args.eps_log2, args.eps_s());
  }
  NeqPlan plan = plan_neq(args.b, delta, args.n1, args.Delta, args.eps_s());
  plan.max_block_samples = args.max_block_samples;
  return plan;
}

int cmd_plan(const PlanArgs& args, const std::string& out_path) {
  const Plan plan = build_plan(args);
  std::string text = std::visit([](const auto& p) { return to_text(p); }, plan);
  if (std::holds_alternative<NeqPlan>(plan)) {
    const auto& p = std::get<NeqPlan>(plan);
    std::ostringstream extra;
    for (std::uint64_t ell = 1; ell <= 5; ++ell) {
      extra << "# block " << ell << ": samples=" << p.block_samples(ell)
            << " r_len=" << p.r_len(ell) << " next_seed=" << p.seed_len(ell + 1)
            << "\n";
    }
    text += extra.str();
  }
  if (!out_path.empty()) {
    write_file(out_path, std::span<const std::uint8_t>(
                             reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
  }
  std::cout << text;
  return 0;
}

int cmd_extract(const std::string& plan_path, const std::string& seed_path,
                const std::string& in_path, const std::string& out_path,
                unsigned workers) {
  const Plan plan = parse_plan_text(read_text(plan_path));
  // Seed is validated before the input is touched.
  const auto seed_bytes = read_file(seed_path);
  const std::size_t seed_len = std::visit(
      [](const auto& p) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, EqPlan>) {
          return p.gadget.d;
        } else {
          return p.seed_len(1);
        }
      },
      plan);
  if (seed_bytes.size() != (seed_len + 7) / 8) {
    throw std::runtime_error("seed file must hold exactly " +
                             std::to_string(seed_len) + " bits (" +
                             std::to_string((seed_len + 7) / 8) + " bytes)");
  }
  const BitString seed = BitString::from_bytes(seed_bytes, seed_len);
  const BitString raw = read_bits(in_path);

  const auto start = std::chrono::steady_clock::now();
  BitString out_bits;
  StreamSummary summary;
  if (const EqPlan* eq = std::get_if<EqPlan>(&plan); eq && workers > 1) {
    out_bits = extract_eq_parallel(*eq, seed, raw, workers);
    summary.emitted_bits = out_bits.size();
    summary.blocks_processed = out_bits.size() / eq->r_per_block;
    summary.discarded_samples =
        raw.size() / eq->b - summary.blocks_processed * eq->n;
    summary.error_bound_spent =
        summary.blocks_processed * eq->gadget.eps + 2 * eq->eps_s;
  } else {
    ExtractorState state = std::visit(
        [&](const auto& p) { return ExtractorState(p, seed); }, plan);
    out_bits = state.feed_bits(raw);
    summary = state.finish();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const auto bytes = out_bits.to_bytes();
  write_file(out_path, bytes);
  std::cout << "blocks=" << summary.blocks_processed << "\n"
            << "emitted_bits=" << summary.emitted_bits << "\n"
            << "discarded_samples=" << summary.discarded_samples << "\n"
            << "buffered_samples=" << summary.buffered_samples << "\n"
            << "capped=" << (summary.capped ? 1 : 0) << "\n"
            << "error_bound_spent_log2="
            << (summary.error_bound_spent > 0
                    ? (double)std::log2(summary.error_bound_spent)
                    : -std::numeric_limits<double>::infinity())
            << "\n"
            << "seconds=" << secs << "\n"
            << "throughput_in_bps=" << (secs > 0 ? raw.size() / secs : 0)
            << "\n"
            << "throughput_out_bps="
            << (secs > 0 ? out_bits.size() / secs : 0) << "\n";
  return 0;
}

int cmd_entropy(const std::string& model_path, const std::string& fit_path,
                unsigned b, double R, double var_x, double sigma_x2,
                double sigma_u2, double tol, bool normalize_range) {
  HomodyneModel model{var_x, sigma_x2, sigma_u2, b, R};
  if (!model_path.empty()) {
    std::istringstream in(read_text(model_path));
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (line.empty() || line[0] == '#' || eq == std::string::npos) {
        continue;
      }
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 1);
      if (key == "var_x") model.var_x = std::stod(val);
      else if (key == "sigma_x2") model.sigma_x2 = std::stod(val);
      else if (key == "sigma_u2") model.sigma_u2 = std::stod(val);
      else if (key == "b") model.b = static_cast<unsigned>(std::stoul(val));
      else if (key == "R") model.R = std::stod(val);
      else throw std::runtime_error("model file: unknown key: " + key);
    }
  }
  if (!fit_path.empty()) {
    // Fit the variances from a quantized recording; sigma_u2 stays as given.
    const BitString bits = read_bits(fit_path);
    const std::size_t count = bits.size() / model.b;
    if (count < 3) {
      throw std::runtime_error("fit recording too short");
    }
    std::vector<double> xs(count);
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < count; ++i) {
      bits.extract_words(i * model.b, model.b, &w);
      xs[i] = adc_dequantize(static_cast<std::uint32_t>(w) + 1, model.b,
                             model.R);
    }
    const Ar1Fit fit = fit_ar1(xs);
    model.var_x = fit.var_x;
    model.sigma_x2 = fit.sigma_x2;
  }
  const EntropyBound bound = delta_star(model, (long double)tol,
                                        normalize_range);
  std::cout.precision(15);
  std::cout << "noise_n=" << (double)bound.noise_n << "\n"
            << "g_star=" << (double)bound.g_star << "\n"
            << "delta_star_bits=" << (double)bound.delta_star << "\n"
            << "delta=" << (double)(bound.delta_star / model.b) << "\n"
            << "clamped=" << (bound.clamped ? 1 : 0) << "\n";
  if (bound.clamped) {
    std::cerr << "warning: delta_star clamped from "
              << (double)bound.delta_star_raw << " into [0, b]\n";
  }
  if (bound.zero_entropy) {
    std::cerr << "warning: certified entropy is zero; extraction impossible "
                 "at this rate\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(double var_x, double sigma_x2, double sigma_u2, unsigned b,
                 double R, std::size_t count, std::uint64_t prng_seed,
                 const std::string& out_path) {
  const HomodyneModel model{var_x, sigma_x2, sigma_u2, b, R};
  HomodyneSimulator sim(SimSourceParams::from_model(model, prng_seed));
  const BitString bits = sim.generate_bits(count);
  write_file(out_path, bits.to_bytes());
  std::cout << "samples=" << count << "\n"
            << "bits=" << bits.size() << "\n"
            << "bytes=" << (bits.size() + 7) / 8 << "\n";
  return 0;
}

int cmd_check(const std::string& in_path, std::uint64_t nbits,
              unsigned block_len, double alpha) {
  BitString bits = read_bits(in_path);
  if (nbits > 0) {
    if (nbits > bits.size()) {
      throw std::runtime_error("check: file has fewer bits than --bits");
    }
    bits = bits.slice(0, nbits);
  }
  const TestResult mono = monobit_test(bits, alpha);
  const TestResult chi2 = block_chi2_test(bits, block_len, alpha);
  std::cout << "advisory=1\n"
            << "monobit_p=" << mono.p_value << "\n"
            << "monobit_pass=" << (mono.pass ? 1 : 0) << "\n"
            << "block_chi2_p=" << chi2.p_value << "\n"
            << "block_chi2_pass=" << (chi2.pass ? 1 : 0) << "\n";
  return mono.pass && chi2.pass ? 0 : 1;
}

int cmd_selftest() {
  return run_selftest(std::cout) ? 0 : 1;
}

int cmd_gen_test_seed(std::size_t bits, std::uint64_t prng_seed,
                      const std::string& out_path) {
  Prng prng(prng_seed);
  const BitString seed = prng.next_bits(bits);
  write_file(out_path, seed.to_bytes());
  std::cout << "bits=" << bits << "\n"
            << "quality=TEST ONLY (pseudorandom, not a uniform seed)\n";
  return 0;
}

int cmd_bench(const PlanArgs& plan_args, double duration, unsigned workers) {
  // Default profile: the 16-bit, delta = 10.74/16 source with 496-bit blocks.
  PlanArgs args = plan_args;
  if (args.N == 0) {
    args.N = std::uint64_t(1) << 51;
  }
  const Plan plan_v = build_plan(args);
  const EqPlan* eq = std::get_if<EqPlan>(&plan_v);
  if (eq == nullptr) {
    throw std::runtime_error("bench: requires an eq plan");
  }
  Prng prng(0xbe7c4);
  const BitString seed = prng.next_bits(eq->gadget.d);
  const std::size_t batch_blocks = 4096;
  const BitString raw = prng.next_bits(batch_blocks * eq->block_bits);

  auto run = [&](unsigned w, bool packed) {
    std::uint64_t blocks = 0;
    const auto start = std::chrono::steady_clock::now();
    double secs = 0;
    while (secs < duration) {
      if (packed) {
        const BitString out = extract_eq_parallel(*eq, seed, raw, w);
        blocks += out.size() / eq->r_per_block;
      } else {
        // Reference path, one row at a time.
        const ToeplitzSpec spec = eq->gadget.toeplitz_spec();
        for (std::size_t k = 0; k < 8; ++k) {
          toeplitz_matvec_packed(spec, seed,
                                 raw.slice(k * eq->block_bits, eq->block_bits));
        }
        blocks += 8;
      }
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
                 .count();
    }
    return std::pair<double, double>(blocks / secs,
                                     blocks / secs * eq->r_per_block);
  };

  std::cout << "profile_block_bits=" << eq->block_bits << "\n"
            << "profile_r_per_block=" << eq->r_per_block << "\n";
  const auto [rows_bps, out_bps] = run(1, true);
  std::cout << "packed_blocks_per_s=" << rows_bps << "\n"
            << "packed_out_bps=" << out_bps << "\n"
            << "packed_in_bps=" << rows_bps * eq->block_bits << "\n";
  const auto [ref_blocks, ref_bps] = run(1, false);
  std::cout << "rowwise_blocks_per_s=" << ref_blocks << "\n"
            << "rowwise_out_bps=" << ref_bps << "\n";
  if (workers > 1) {
    const auto [w_blocks, w_bps] = run(workers, true);
    std::cout << "workers=" << workers << "\n"
              << "parallel_out_bps=" << w_bps << "\n"
              << "parallel_scaling=" << w_bps / out_bps << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming randomness extraction for reverse block sources"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override");

  PlanArgs plan_args;
  std::string plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "compute an extraction plan");
  add_plan_flags(plan_cmd, plan_args);
  plan_cmd->add_option("--out", plan_out, "also write the plan to a file");

  std::string x_plan, x_seed, x_in, x_out;
  unsigned x_workers = 1;
  auto* extract_cmd = app.add_subcommand("extract", "run the online extractor");
  extract_cmd->add_option("--plan", x_plan, "plan file from `plan --out`")
      ->required();
  extract_cmd->add_option("--seed", x_seed, "seed file (binary bits)")
      ->required();
  extract_cmd->add_option("--in", x_in, "raw input file")->required();
  extract_cmd->add_option("--out", x_out, "output file")->required();
  extract_cmd->add_option("--workers", x_workers, "eq-mode worker count");

  std::string e_model, e_fit;
  unsigned e_b = 16;
  double e_R = 1, e_var = 0, e_sx2 = 0, e_su2 = 0, e_tol = 1e-12;
  bool e_norm = false;
  auto* entropy_cmd =
      app.add_subcommand("entropy", "certified min-entropy bound");
  entropy_cmd->add_option("--model", e_model, "key=value model file");
  entropy_cmd->add_option("--fit", e_fit, "raw recording to fit (AR(1))");
  entropy_cmd->add_option("--b", e_b, "ADC bit depth");
  entropy_cmd->add_option("--R", e_R, "ADC range");
  entropy_cmd->add_option("--var-x", e_var, "stationary variance");
  entropy_cmd->add_option("--sigma-x2", e_sx2, "conditional variance");
  entropy_cmd->add_option("--sigma-u2", e_su2, "excess noise variance");
  entropy_cmd->add_option("--tol", e_tol, "solver residual tolerance");
  entropy_cmd->add_flag("--normalize-range", e_norm,
                        "use R/((2^b-2)g) on the left-hand side");

  double s_var = 1.0, s_sx2 = 0.5, s_su2 = 0.0, s_R = 3.0;
  unsigned s_b = 16;
  std::size_t s_count = 0;
  std::uint64_t s_seed = 1;
  std::string s_out;
  auto* sim_cmd = app.add_subcommand("simulate", "simulated homodyne source");
  sim_cmd->add_option("--var-x", s_var, "stationary variance");
  sim_cmd->add_option("--sigma-x2", s_sx2, "conditional variance");
  sim_cmd->add_option("--sigma-u2", s_su2, "excess noise variance");
  sim_cmd->add_option("--b", s_b, "ADC bit depth");
  sim_cmd->add_option("--R", s_R, "ADC range");
  sim_cmd->add_option("--count", s_count, "samples to generate")->required();
  sim_cmd->add_option("--prng-seed", s_seed, "simulation PRNG seed");
  sim_cmd->add_option("--out", s_out, "raw output file")->required();

  std::string c_in;
  std::uint64_t c_bits = 0;
  unsigned c_block = 8;
  double c_alpha = 0.01;
  auto* check_cmd = app.add_subcommand("check", "advisory statistical tests");
  check_cmd->add_option("--in", c_in, "bit file to test")->required();
  check_cmd->add_option("--bits", c_bits, "bits to test (0 = whole file)");
  check_cmd->add_option("--block-len", c_block, "chi-square block length");
  check_cmd->add_option("--alpha", c_alpha, "significance level");

  PlanArgs bench_args;
  bench_args.N = 0;
  double b_duration = 2.0;
  unsigned b_workers = 4;
  auto* bench_cmd = app.add_subcommand("bench", "throughput benchmark");
  add_plan_flags(bench_cmd, bench_args);
  bench_cmd->add_option("--duration", b_duration, "seconds per measurement");
  bench_cmd->add_option("--workers", b_workers, "parallel worker count");

  app.add_subcommand("selftest", "run the oracle suite");

  std::size_t g_bits = 0;
  std::uint64_t g_seed = 1;
  std::string g_out;
  auto* gen_cmd =
      app.add_subcommand("gen-test-seed", "pseudorandom seed, TEST ONLY");
  gen_cmd->add_option("--bits", g_bits, "seed length in bits")->required();
  gen_cmd->add_option("--prng-seed", g_seed, "PRNG seed");
  gen_cmd->add_option("--out", g_out, "seed output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed()) {
      return cmd_plan(plan_args, plan_out);
    }
    if (extract_cmd->parsed()) {
      return cmd_extract(x_plan, x_seed, x_in, x_out, x_workers);
    }
    if (entropy_cmd->parsed()) {
      return cmd_entropy(e_model, e_fit, e_b, e_R, e_var, e_sx2, e_su2, e_tol,
                         e_norm);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(s_var, s_sx2, s_su2, s_b, s_R, s_count, s_seed,
                          s_out);
    }
    if (check_cmd->parsed()) {
      return cmd_check(c_in, c_bits, c_block, c_alpha);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_args, b_duration, b_workers);
    }
    if (app.get_subcommand("selftest")->parsed()) {
      return cmd_selftest();
    }
    if (gen_cmd->parsed()) {
      return cmd_gen_test_seed(g_bits, g_seed, g_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
