#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rbext/bitstring.hpp"
#include "rbext/entropy.hpp"

namespace rbext {

// Test PRNG: mt19937_64 with a hand-rolled Box-Muller transform so the
// Gaussian stream is identical on every platform (std::normal_distribution
// is implementation-defined). Simulation and test fixtures only; never an
// extraction seed.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double next_gaussian();
  BitString next_bits(std::size_t count);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0;
  bool has_spare_ = false;
};

struct SimSourceParams {
  HomodyneModel model;
  double phi = 0;  // AR(1) coefficient; phi^2 = 1 - sigma_x2/var_x
  std::uint64_t prng_seed = 0;

  // Derives phi from the model's two variances (sign nonnegative).
  static SimSourceParams from_model(const HomodyneModel& model,
                                    std::uint64_t prng_seed);
  void validate() const;
};

// AR(1) Gaussian voltage process with the model's stationary and conditional
// variances, pushed through the ADC. Deterministic given prng_seed.
class HomodyneSimulator {
 public:
  explicit HomodyneSimulator(const SimSourceParams& params);

  double next_analog();
  std::uint32_t next_sample() {
    return adc_quantize(next_analog(), params_.model.b, params_.model.R);
  }

  std::vector<double> generate_analog(std::size_t count);
  std::vector<std::uint32_t> generate(std::size_t count);
  // Samples packed b bits each, LSB first -- the raw-input file layout.
  // Level j is stored as j-1 so the full [0, 2^b) code range is used.
  BitString generate_bits(std::size_t count);

 private:
  SimSourceParams params_;
  Prng prng_;
  double prev_ = 0;
  bool started_ = false;
};

// First half uniform, second half a copy in the same order: min-entropy N/2
// but not a reverse block source.
BitString duplicate_halves_source(std::size_t half_len_bits,
                                  std::uint64_t prng_seed);

// Two-point mixture: uniform on the half-space {x : bit pivot_bit of x = 1}
// with probability 2^{-delta}, uniform on the complement otherwise. A valid
// (b, N, delta)-reverse block source despite being far from uniform.
std::vector<std::uint32_t> sv_adversarial_source(unsigned b, std::size_t N,
                                                 double delta,
                                                 unsigned pivot_bit,
                                                 std::uint64_t prng_seed);

}  // namespace rbext
