#include "rbext/sources.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbext {

double Prng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = next_double();
  while (u1 <= 0) {
    u1 = next_double();
  }
  const double u2 = next_double();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double two_pi = 6.283185307179586476925287;
  spare_ = mag * std::sin(two_pi * u2);
  has_spare_ = true;
  return mag * std::cos(two_pi * u2);
}

BitString Prng::next_bits(std::size_t count) {
  BitString out;
  std::size_t done = 0;
  while (done < count) {
    const unsigned chunk =
        static_cast<unsigned>(std::min<std::size_t>(64, count - done));
    out.append_bits(next_u64(), chunk);
    done += chunk;
  }
  return out;
}

SimSourceParams SimSourceParams::from_model(const HomodyneModel& model,
                                            std::uint64_t prng_seed) {
  model.validate();
  SimSourceParams p;
  p.model = model;
  p.phi = std::sqrt(1.0 - model.sigma_x2 / model.var_x);
  p.prng_seed = prng_seed;
  return p;
}

void SimSourceParams::validate() const {
  model.validate();
  if (!(phi > -1.0 && phi < 1.0)) {
    throw std::invalid_argument("SimSourceParams: phi must be in (-1, 1)");
  }
  const double implied = phi * phi;
  const double target = 1.0 - model.sigma_x2 / model.var_x;
  if (std::fabs(implied - target) > 1e-9) {
    throw std::invalid_argument(
        "SimSourceParams: phi^2 must equal 1 - sigma_x2/var_x");
  }
}

HomodyneSimulator::HomodyneSimulator(const SimSourceParams& params)
    : params_(params), prng_(params.prng_seed) {
  params_.validate();
}

double HomodyneSimulator::next_analog() {
  const double sigma_x = std::sqrt(params_.model.sigma_x2);
  if (!started_) {
    started_ = true;
    prev_ = std::sqrt(params_.model.var_x) * prng_.next_gaussian();
  } else {
    prev_ = params_.phi * prev_ + sigma_x * prng_.next_gaussian();
  }
  return prev_;
}

std::vector<double> HomodyneSimulator::generate_analog(std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(next_analog());
  }
  return out;
}

std::vector<std::uint32_t> HomodyneSimulator::generate(std::size_t count) {
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(next_sample());
  }
  return out;
}

BitString HomodyneSimulator::generate_bits(std::size_t count) {
  BitString out;
  for (std::size_t i = 0; i < count; ++i) {
    out.append_bits(next_sample() - 1, params_.model.b);
  }
  return out;
}

BitString duplicate_halves_source(std::size_t half_len_bits,
                                  std::uint64_t prng_seed) {
  if (half_len_bits < 1) {
    throw std::invalid_argument(
        "duplicate_halves_source: half_len_bits must be >= 1");
  }
  Prng prng(prng_seed);
  BitString out = prng.next_bits(half_len_bits);
  out.append(out.slice(0, half_len_bits));
  return out;
}

std::vector<std::uint32_t> sv_adversarial_source(unsigned b, std::size_t N,
                                                 double delta,
                                                 unsigned pivot_bit,
                                                 std::uint64_t prng_seed) {
  if (b < 1 || b > 31 || N < 1) {
    throw std::invalid_argument("sv_adversarial_source: bad b or N");
  }
  if (!(delta > 0 && delta < 1)) {
    throw std::invalid_argument("sv_adversarial_source: delta must be in (0,1)");
  }
  if (pivot_bit >= b * N) {
    throw std::invalid_argument("sv_adversarial_source: pivot_bit out of range");
  }
  Prng prng(prng_seed);
  const bool in_half_space = prng.next_double() < std::exp2(-delta);
  BitString bits = prng.next_bits(b * N);
  bits.set(pivot_bit, in_half_space);
  std::vector<std::uint32_t> samples(N);
  for (std::size_t i = 0; i < N; ++i) {
    std::uint32_t v = 0;
    for (unsigned j = 0; j < b; ++j) {
      v |= static_cast<std::uint32_t>(bits.get(i * b + j)) << j;
    }
    samples[i] = v;
  }
  return samples;
}

}  // namespace rbext
