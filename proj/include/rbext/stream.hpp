#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rbext/planner.hpp"
#include "rbext/toeplitz.hpp"

namespace rbext {

struct StreamSummary {
  std::uint64_t emitted_bits = 0;
  std::uint64_t blocks_processed = 0;
  std::uint64_t discarded_samples = 0;  // eq: trailing partial block
  std::uint64_t buffered_samples = 0;   // neq: retained incomplete block
  long double error_bound_spent = 0;
  bool capped = false;  // neq block growth hit max_block_samples
};

struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Online extractor state machine for both block schemes. Single-owner: one
// logical consumer calls feed/finish; never buffers more than one block plus
// the bits fed since the last block boundary.
class ExtractorState {
 public:
  ExtractorState(EqPlan plan, const BitString& initial_seed);
  ExtractorState(NeqPlan plan, const BitString& initial_seed);

  // Appends samples (b-bit values each) and returns every bit emitted by the
  // completed blocks. Output for block l depends only on blocks 1..l and the
  // initial seed.
  BitString feed(std::span<const std::uint64_t> samples);
  // Same contract, input already packed b bits per sample LSB-first.
  BitString feed_bits(const BitString& bits);

  StreamSummary finish();

  std::uint64_t block_index() const { return block_index_; }
  std::uint64_t emitted_bits() const { return emitted_bits_; }
  const BitString& current_seed() const { return seed_; }

 private:
  BitString drain_blocks();
  void process_block(std::size_t offset, BitString& out);
  std::size_t current_block_bits() const;

  std::optional<EqPlan> eq_;
  std::optional<NeqPlan> neq_;
  BitString seed_;
  BitString buffer_;
  std::size_t buffer_pos_ = 0;  // consumed prefix of buffer_
  std::uint64_t block_index_ = 1;
  std::uint64_t blocks_processed_ = 0;
  std::uint64_t emitted_bits_ = 0;
  std::uint64_t fed_samples_ = 0;
  bool finished_ = false;
  bool capped_ = false;
  // eq fast path: partial products for the shared per-block matrix,
  // materialized once from the initial seed.
  std::unique_ptr<ToeplitzKernel> kernel_;
  std::vector<std::uint64_t> scratch_;
};

// Equal-block extraction with the block loop fanned out across OpenMP
// workers. Valid only for seed-preserving expanded gadgets (the seed is
// identical in every block, so blocks are independent); bit-identical to the
// sequential feed/finish path. Trailing partial block is discarded.
BitString extract_eq_parallel(const EqPlan& plan, const BitString& initial_seed,
                              const BitString& raw_bits, unsigned workers);

}  // namespace rbext
