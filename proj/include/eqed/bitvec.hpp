#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqed {

/// Fixed-length bit vector. Bit i (0-based) is stage i+1 when used as a MISR state.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  bool operator[](std::size_t i) const { return get(i); }

  void clear() {
    for (auto& w : words_) w = 0;
  }

  bool none() const {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  BitVector& operator^=(const BitVector& o) {
    if (o.size_ != size_) throw std::invalid_argument("BitVector: size mismatch in xor");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  /// Parity of (this AND mask).
  bool parity_with(const BitVector& mask) const {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & mask.words_[i];
    return std::popcount(acc) & 1;
  }

  /// Shift towards higher indices by one; the vacated bit 0 becomes `in`, bit size-1 falls off.
  void shift_up(bool in) {
    std::uint64_t carry = in ? 1 : 0;
    for (auto& w : words_) {
      const std::uint64_t next = w >> 63;
      w = (w << 1) | carry;
      carry = next;
    }
    trim();
  }

  /// XOR `o` into the low bits (o.size() <= size()).
  void xor_low(const BitVector& o) {
    if (o.size_ > size_) throw std::invalid_argument("BitVector: xor_low operand too wide");
    for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] ^= o.words_[i];
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const BitVector& o) const = default;
  bool operator<(const BitVector& o) const {
    if (size_ != o.size_) return size_ < o.size_;
    return words_ < o.words_;
  }

  /// Hex, most significant (highest index) digit first, left-padded to ceil(size/4) digits.
  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    const std::size_t digits = size_ == 0 ? 1 : (size_ + 3) / 4;
    std::string out(digits, '0');
    for (std::size_t d = 0; d < digits; ++d) {
      unsigned v = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t i = d * 4 + b;
        if (i < size_ && get(i)) v |= 1U << b;
      }
      out[digits - 1 - d] = kDigits[v];
    }
    return out;
  }

  static BitVector from_hex(std::string_view hex, std::size_t size) {
    BitVector out(size);
    std::size_t bit = 0;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it) {
      const char c = *it;
      unsigned v;
      if (c >= '0' && c <= '9') {
        v = static_cast<unsigned>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        v = static_cast<unsigned>(c - 'a' + 10);
      } else if (c >= 'A' && c <= 'F') {
        v = static_cast<unsigned>(c - 'A' + 10);
      } else {
        throw std::invalid_argument("bad hex digit in '" + std::string(hex) + "'");
      }
      for (unsigned b = 0; b < 4; ++b, ++bit) {
        if (!(v >> b & 1U)) continue;
        if (bit >= size) throw std::invalid_argument("hex value '" + std::string(hex) + "' wider than " + std::to_string(size) + " bits");
        out.set(bit, true);
      }
    }
    return out;
  }

  /// Bit string with index 0 first ("stage 1 leftmost").
  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  static BitVector from_string(std::string_view bits) {
    BitVector out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') {
        out.set(i, true);
      } else if (bits[i] != '0') {
        throw std::invalid_argument("bad bit character in '" + std::string(bits) + "'");
      }
    }
    return out;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace eqed
