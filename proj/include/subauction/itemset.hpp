#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "subauction/errors.hpp"

namespace subauction {

// Maximum number of items any object in this library handles. Set tables,
// welfare DP and game separation scans all enumerate subsets, so this is a
// hard capability limit, not a tuning knob.
inline constexpr int kMaxItems = 24;

// A subset of items {0, ..., m-1} as a bitmask. Item j is bit (1u << j).
// The wrapper is deliberately thin: all hot loops work on raw masks.
class ItemSet {
 public:
  constexpr ItemSet() : bits_(0) {}
  constexpr explicit ItemSet(std::uint32_t bits) : bits_(bits) {}

  // Checked factory: every set bit must be below m.
  static ItemSet checked(std::uint32_t bits, int m) {
    if (m < 0 || m > kMaxItems) {
      throw InputError("item count out of range: " + std::to_string(m));
    }
    if (m < 32 && (bits >> m) != 0) {
      throw InputError("item set has bits beyond item count");
    }
    return ItemSet(bits);
  }

  static ItemSet full(int m) {
    if (m < 0 || m > kMaxItems) {
      throw InputError("item count out of range: " + std::to_string(m));
    }
    return ItemSet(m == 32 ? ~0u : ((1u << m) - 1u));
  }

  static ItemSet single(int j) { return ItemSet(1u << j); }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int j) const { return (bits_ >> j) & 1u; }

  constexpr ItemSet with(int j) const { return ItemSet(bits_ | (1u << j)); }
  constexpr ItemSet without(int j) const { return ItemSet(bits_ & ~(1u << j)); }

  friend constexpr ItemSet operator|(ItemSet a, ItemSet b) { return ItemSet(a.bits_ | b.bits_); }
  friend constexpr ItemSet operator&(ItemSet a, ItemSet b) { return ItemSet(a.bits_ & b.bits_); }
  // Set difference a \ b.
  friend constexpr ItemSet operator-(ItemSet a, ItemSet b) { return ItemSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(ItemSet a, ItemSet b) { return a.bits_ == b.bits_; }
  friend constexpr bool operator!=(ItemSet a, ItemSet b) { return a.bits_ != b.bits_; }

  constexpr bool subset_of(ItemSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(ItemSet other) const { return (bits_ & other.bits_) != 0; }

  std::vector<int> items() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) {
      out.push_back(std::countr_zero(b));
    }
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int j : items()) {
      if (!first) s += ",";
      s += std::to_string(j);
      first = false;
    }
    return s + "}";
  }

 private:
  std::uint32_t bits_;
};

// Iterates s over all subsets of mask, including 0 and mask itself.
// Usage: for (std::uint32_t s = mask;; s = (s - 1) & mask) { ...; if (s == 0) break; }
// Provided as a function to keep call sites readable.
template <typename F>
inline void for_each_subset(std::uint32_t mask, F&& f) {
  std::uint32_t s = mask;
  while (true) {
    f(s);
    if (s == 0) break;
    s = (s - 1) & mask;
  }
}

}  // namespace subauction
