#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace rbext {

// Packed bit string. Bit i lives in word i/64 at position i%64, which on a
// little-endian byte view is byte i/8, bit position i%8 (LSB first) -- the
// same layout as the raw/seed/output file formats, so files round-trip
// without any reshuffling.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t len);  // zero-filled

  static BitString from_bytes(std::span<const std::uint8_t> bytes,
                              std::size_t len);
  static BitString from_bits(std::initializer_list<int> bits);

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const;  // out of range -> std::out_of_range
  void set(std::size_t i, bool v);

  void push_back(bool bit);
  // Appends the low nbits of value, LSB first.
  void append_bits(std::uint64_t value, unsigned nbits);
  void append(const BitString& other);
  void append_words(const std::uint64_t* src, std::size_t count_bits);

  BitString slice(std::size_t pos, std::size_t count) const;
  std::size_t count_ones() const;
  std::vector<std::uint8_t> to_bytes() const;  // final byte zero-padded

  std::span<const std::uint64_t> words() const { return words_; }
  std::size_t word_count() const { return words_.size(); }

  // Copies bits [pos, pos+count) into dst, LSB aligned; dst must hold
  // ceil(count/64) words. Bits past count are cleared.
  void extract_words(std::size_t pos, std::size_t count,
                     std::uint64_t* dst) const;
  // Overwrites bits [pos, pos+count) from src, LSB aligned.
  void deposit_words(std::size_t pos, std::size_t count,
                     const std::uint64_t* src);

  BitString operator^(const BitString& other) const;
  bool operator==(const BitString& other) const;

 private:
  void mask_tail();

  std::vector<std::uint64_t> words_;
  std::size_t len_ = 0;
};

}  // namespace rbext
