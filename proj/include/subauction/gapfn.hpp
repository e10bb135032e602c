#pragma once

#include <cstdint>
#include <vector>

namespace subauction {

// Minimum-cover count over the nonzero vectors of F_2^k. Item j stands for
// the vector j+1; the i-th cover set (i = 1 .. 2^k-1) contains exactly the
// items whose vector has odd inner product with i. value(T) is the least
// number of cover sets whose union contains T, 0 for the empty set, and
// exactly k for the full set.
class GapFunction {
 public:
  explicit GapFunction(int k);  // 1 <= k <= 4

  int k() const { return k_; }
  int num_items() const { return m_; }
  int value(std::uint32_t t) const { return table_[t]; }
  std::uint32_t cover_set(int i) const { return covers_[i]; }
  const std::vector<std::uint8_t>& table() const { return table_; }

 private:
  int k_ = 0;
  int m_ = 0;
  std::vector<std::uint32_t> covers_;  // indexed 1 .. 2^k-1; index 0 unused
  std::vector<std::uint8_t> table_;    // size 2^m
};

// Item sets of the nonzero vectors of every d-dimensional linear subspace of
// F_2^k. Each returned mask has exactly 2^d - 1 bits.
std::vector<std::uint32_t> subspace_family(int k, int d);

// Layered sum of block gap functions on m = 2^(2^L) items. Level ell
// (0 <= ell <= L) tiles the low item ids with B = m / 2^(2^ell) contiguous
// blocks of size 2^(2^ell) - 1 and leaves the highest B ids out; its value is
// the average over blocks of the block's cover count divided by 2^ell. The
// total across levels of the full set is exactly L+1.
class StackedFunction {
 public:
  explicit StackedFunction(int levels);  // 0 <= L <= 2

  int levels() const { return L_; }
  int num_items() const { return m_; }
  double value(std::uint32_t s) const;
  double level_value(int ell, std::uint32_t s) const;

  struct Level {
    int k = 0;           // 2^ell
    int block_size = 0;  // 2^(2^ell) - 1
    std::vector<int> offsets;
    int gap_index = 0;
  };
  const Level& level(int ell) const { return levels_[ell]; }
  const GapFunction& level_gap(int ell) const { return gaps_[levels_[ell].gap_index]; }

 private:
  int L_ = 0;
  int m_ = 0;
  std::vector<GapFunction> gaps_;
  std::vector<Level> levels_;
};

}  // namespace subauction
