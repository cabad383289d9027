#include "rbext/bitstring.hpp"

#include <bit>
#include <stdexcept>

namespace rbext {

namespace {
constexpr std::size_t kWordBits = 64;

std::size_t words_for(std::size_t bits) {
  return (bits + kWordBits - 1) / kWordBits;
}
}  // namespace

BitString::BitString(std::size_t len) : words_(words_for(len)), len_(len) {}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes,
                                std::size_t len) {
  if (bytes.size() * 8 < len) {
    throw std::invalid_argument("BitString::from_bytes: too few bytes");
  }
  BitString out(len);
  for (std::size_t i = 0; i < bytes.size() && i * 8 < len; ++i) {
    out.words_[i / 8] |= std::uint64_t(bytes[i]) << (8 * (i % 8));
  }
  out.mask_tail();
  return out;
}

BitString BitString::from_bits(std::initializer_list<int> bits) {
  BitString out(bits.size());
  std::size_t i = 0;
  for (int b : bits) {
    out.set(i++, b != 0);
  }
  return out;
}

bool BitString::get(std::size_t i) const {
  if (i >= len_) {
    throw std::out_of_range("BitString::get: index out of range");
  }
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
}

void BitString::set(std::size_t i, bool v) {
  if (i >= len_) {
    throw std::out_of_range("BitString::set: index out of range");
  }
  const std::uint64_t mask = std::uint64_t(1) << (i % kWordBits);
  if (v) {
    words_[i / kWordBits] |= mask;
  } else {
    words_[i / kWordBits] &= ~mask;
  }
}

void BitString::push_back(bool bit) {
  if (len_ % kWordBits == 0) {
    words_.push_back(0);
  }
  if (bit) {
    words_[len_ / kWordBits] |= std::uint64_t(1) << (len_ % kWordBits);
  }
  ++len_;
}

void BitString::append_bits(std::uint64_t value, unsigned nbits) {
  if (nbits > 64) {
    throw std::invalid_argument("BitString::append_bits: nbits > 64");
  }
  if (nbits == 0) {
    return;
  }
  const std::uint64_t v =
      nbits == 64 ? value : value & ((std::uint64_t(1) << nbits) - 1);
  const std::size_t pos = len_ % kWordBits;
  if (pos == 0) {
    words_.push_back(v);
  } else {
    words_.back() |= v << pos;
    if (pos + nbits > kWordBits) {
      words_.push_back(v >> (kWordBits - pos));
    }
  }
  len_ += nbits;
}

void BitString::append_words(const std::uint64_t* src, std::size_t count_bits) {
  std::size_t done = 0;
  std::size_t w = 0;
  while (done < count_bits) {
    const unsigned chunk =
        static_cast<unsigned>(std::min<std::size_t>(64, count_bits - done));
    append_bits(src[w++], chunk);
    done += chunk;
  }
}

void BitString::append(const BitString& other) {
  append_words(other.words_.data(), other.len_);
}

BitString BitString::slice(std::size_t pos, std::size_t count) const {
  if (pos + count > len_) {
    throw std::out_of_range("BitString::slice: range out of bounds");
  }
  BitString out(count);
  extract_words(pos, count, out.words_.data());
  return out;
}

std::size_t BitString::count_ones() const {
  std::size_t total = 0;
  for (std::uint64_t w : words_) {
    total += static_cast<std::size_t>(std::popcount(w));
  }
  return total;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out((len_ + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

void BitString::extract_words(std::size_t pos, std::size_t count,
                              std::uint64_t* dst) const {
  if (pos + count > len_) {
    throw std::out_of_range("BitString::extract_words: range out of bounds");
  }
  const std::size_t nw = words_for(count);
  const std::size_t wi = pos / kWordBits;
  const unsigned shift = pos % kWordBits;
  for (std::size_t k = 0; k < nw; ++k) {
    std::uint64_t w = words_[wi + k] >> shift;
    if (shift != 0 && wi + k + 1 < words_.size()) {
      w |= words_[wi + k + 1] << (kWordBits - shift);
    }
    dst[k] = w;
  }
  const unsigned tail = count % kWordBits;
  if (tail != 0) {
    dst[nw - 1] &= (std::uint64_t(1) << tail) - 1;
  }
}

void BitString::deposit_words(std::size_t pos, std::size_t count,
                              const std::uint64_t* src) {
  if (pos + count > len_) {
    throw std::out_of_range("BitString::deposit_words: range out of bounds");
  }
  std::size_t done = 0;
  while (done < count) {
    const std::size_t i = pos + done;
    const std::size_t wi = i / kWordBits;
    const unsigned off = i % kWordBits;
    const unsigned take = static_cast<unsigned>(
        std::min<std::size_t>(kWordBits - off, count - done));
    std::uint64_t v = src[done / kWordBits] >> (done % kWordBits);
    if (done % kWordBits != 0 && done % kWordBits + take > kWordBits) {
      v |= src[done / kWordBits + 1] << (kWordBits - done % kWordBits);
    }
    const std::uint64_t mask =
        take == kWordBits ? ~std::uint64_t(0)
                          : ((std::uint64_t(1) << take) - 1) << off;
    words_[wi] = (words_[wi] & ~mask) | ((v << off) & mask);
    done += take;
  }
}

BitString BitString::operator^(const BitString& other) const {
  if (len_ != other.len_) {
    throw std::invalid_argument("BitString::operator^: length mismatch");
  }
  BitString out(len_);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out.words_[i] = words_[i] ^ other.words_[i];
  }
  return out;
}

bool BitString::operator==(const BitString& other) const {
  return len_ == other.len_ && words_ == other.words_;
}

void BitString::mask_tail() {
  const unsigned tail = len_ % kWordBits;
  if (tail != 0 && !words_.empty()) {
    words_.back() &= (std::uint64_t(1) << tail) - 1;
  }
}

}  // namespace rbext
