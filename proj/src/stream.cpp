#include "rbext/stream.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbext {

namespace {
constexpr std::size_t kCompactThreshold = std::size_t(1) << 21;
constexpr std::size_t kParallelChunkBlocks = std::size_t(1) << 14;
}  // namespace

ExtractorState::ExtractorState(EqPlan plan, const BitString& initial_seed)
    : eq_(std::move(plan)), seed_(initial_seed) {
  if (seed_.size() != eq_->gadget.d) {
    throw std::invalid_argument("ExtractorState: eq seed must have d bits");
  }
  kernel_ = std::make_unique<ToeplitzKernel>(eq_->gadget.toeplitz_spec(),
                                             seed_);
}

ExtractorState::ExtractorState(NeqPlan plan, const BitString& initial_seed)
    : neq_(std::move(plan)), seed_(initial_seed) {
  if (seed_.size() != neq_->seed_len(1)) {
    throw std::invalid_argument(
        "ExtractorState: neq seed must have d_{b n1} bits");
  }
}

std::size_t ExtractorState::current_block_bits() const {
  if (eq_) {
    return eq_->block_bits;
  }
  return static_cast<std::size_t>(neq_->b) * neq_->block_samples(block_index_);
}

BitString ExtractorState::feed(std::span<const std::uint64_t> samples) {
  if (finished_) {
    throw StateError("feed after finish");
  }
  const unsigned b = eq_ ? eq_->b : neq_->b;
  const std::uint64_t limit =
      b >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << b) - 1;
  for (std::uint64_t v : samples) {
    if (v > limit) {
      throw std::invalid_argument("feed: sample value exceeds b bits");
    }
    buffer_.append_bits(v, b);
  }
  fed_samples_ += samples.size();
  return drain_blocks();
}

BitString ExtractorState::feed_bits(const BitString& bits) {
  if (finished_) {
    throw StateError("feed after finish");
  }
  const unsigned b = eq_ ? eq_->b : neq_->b;
  buffer_.append(bits);
  fed_samples_ += bits.size() / b;
  return drain_blocks();
}

BitString ExtractorState::drain_blocks() {
  BitString out;
  while (!capped_) {
    if (eq_ && blocks_processed_ >= eq_->num_blocks) {
      break;  // budget covers N/n blocks; anything further is discarded
    }
    if (neq_ && neq_->block_samples(block_index_) > neq_->max_block_samples) {
      capped_ = true;  // graceful stop, remaining input stays buffered
      break;
    }
    const std::size_t need = current_block_bits();
    if (buffer_.size() - buffer_pos_ < need) {
      break;
    }
    process_block(buffer_pos_, out);
    buffer_pos_ += need;
    ++block_index_;
    ++blocks_processed_;
  }
  if (buffer_pos_ > kCompactThreshold) {
    buffer_ = buffer_.slice(buffer_pos_, buffer_.size() - buffer_pos_);
    buffer_pos_ = 0;
  }
  emitted_bits_ += out.size();
  return out;
}

void ExtractorState::process_block(std::size_t offset, BitString& out) {
  if (eq_) {
    // Generic chaining cuts z = (T_s.y, s) into r of m-d bits and the next
    // seed of d bits. For the expanded Toeplitz gadget m-d = u, so r is the
    // whole matrix product and the next seed is the current one unchanged.
    scratch_.resize(kernel_->out_words());
    kernel_->apply_at(buffer_, offset, scratch_.data());
    out.append_words(scratch_.data(), eq_->r_per_block);
    return;
  }
  const GadgetParams g = neq_->gadget_at(block_index_);
  const GadgetParams next = neq_->gadget_at(block_index_ + 1);
  const BitString block = buffer_.slice(offset, g.n_bits);
  const BitString z = extract_expanded(g, block, seed_);
  const std::size_t r_len = g.m - next.d;
  out.append(z.slice(0, r_len));
  seed_ = z.slice(r_len, next.d);
}

StreamSummary ExtractorState::finish() {
  if (finished_) {
    throw StateError("finish called twice");
  }
  finished_ = true;
  const unsigned b = eq_ ? eq_->b : neq_->b;
  const std::uint64_t leftover = (buffer_.size() - buffer_pos_) / b;
  StreamSummary s;
  s.emitted_bits = emitted_bits_;
  s.blocks_processed = blocks_processed_;
  s.capped = capped_;
  if (eq_) {
    s.discarded_samples = leftover;
    s.error_bound_spent =
        blocks_processed_ * eq_->gadget.eps + 2 * eq_->eps_s;
  } else {
    s.buffered_samples = leftover;
    s.error_bound_spent = neq_error_after_k(*neq_, blocks_processed_);
  }
  return s;
}

BitString extract_eq_parallel(const EqPlan& plan, const BitString& initial_seed,
                              const BitString& raw_bits, unsigned workers) {
  if (workers < 1) {
    throw std::invalid_argument("extract_eq_parallel: workers must be >= 1");
  }
  if (initial_seed.size() != plan.gadget.d) {
    throw std::invalid_argument("extract_eq_parallel: seed must have d bits");
  }
  const ToeplitzKernel kernel(plan.gadget.toeplitz_spec(), initial_seed);
  const std::uint64_t num_blocks =
      std::min<std::uint64_t>(raw_bits.size() / plan.block_bits,
                              plan.num_blocks);
  const std::size_t ow = kernel.out_words();
  const std::size_t r = plan.r_per_block;
  BitString out(num_blocks * r);
  std::vector<std::uint64_t> tmp(kParallelChunkBlocks * ow);
  for (std::uint64_t base = 0; base < num_blocks;
       base += kParallelChunkBlocks) {
    const std::int64_t cnt = static_cast<std::int64_t>(
        std::min<std::uint64_t>(kParallelChunkBlocks, num_blocks - base));
#pragma omp parallel for num_threads(workers) schedule(static)
    for (std::int64_t k = 0; k < cnt; ++k) {
      kernel.apply_at(raw_bits,
                      (base + static_cast<std::uint64_t>(k)) * plan.block_bits,
                      tmp.data() + static_cast<std::size_t>(k) * ow);
    }
    // Blocks may finish out of order above; assembly is in block order.
    for (std::int64_t k = 0; k < cnt; ++k) {
      out.deposit_words((base + static_cast<std::uint64_t>(k)) * r, r,
                        tmp.data() + static_cast<std::size_t>(k) * ow);
    }
  }
  return out;
}

}  // namespace rbext
