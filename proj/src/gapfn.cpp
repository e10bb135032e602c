#include "subauction/gapfn.hpp"

#include <bit>
#include <set>
#include <string>

#include "subauction/errors.hpp"

namespace subauction {

GapFunction::GapFunction(int k) : k_(k) {
  if (k < 1) throw InputError("gap function needs k >= 1");
  if (k > 4) throw CapabilityError("gap function tables are sized for k <= 4");
  m_ = (1 << k) - 1;
  covers_.assign(1u << k, 0);
  for (int i = 1; i < (1 << k); ++i) {
    std::uint32_t s = 0;
    for (int j = 0; j < m_; ++j) {
      if (std::popcount(static_cast<std::uint32_t>((j + 1) & i)) & 1) s |= 1u << j;
    }
    covers_[i] = s;
  }
  // table_[t] = min covers needed; t \ cover is numerically smaller whenever
  // the cover hits t, so a single ascending pass suffices.
  table_.assign(1u << m_, 0);
  for (std::uint32_t t = 1; t < (1u << m_); ++t) {
    int best = k_ + 1;
    for (int i = 1; i < (1 << k_); ++i) {
      if (covers_[i] & t) {
        int cand = 1 + table_[t & ~covers_[i]];
        if (cand < best) best = cand;
      }
    }
    if (best > k_) {
      // Every nonempty set is coverable with at most k sets (the k covers
      // with i a power of two hit every nonzero vector).
      throw NumericError("gap table construction found an uncoverable set");
    }
    table_[t] = static_cast<std::uint8_t>(best);
  }
}

std::vector<std::uint32_t> subspace_family(int k, int d) {
  if (k < 1 || d < 0 || d > k) throw InputError("subspace family needs 0 <= d <= k");
  if (k > 4) throw CapabilityError("subspace enumeration is sized for k <= 4");
  const int n = 1 << k;
  // Vector-set mask of each subspace (bit x = vector x), deduplicated.
  std::set<std::uint32_t> spans;
  // Depth-first choice of d independent vectors in increasing order.
  struct Frame {
    std::uint32_t span;  // vector-set mask, always contains vector 0
    int next;
    int depth;
  };
  std::vector<Frame> stack;
  stack.push_back({1u, 1, 0});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.depth == d) {
      spans.insert(f.span);
      continue;
    }
    for (int v = f.next; v < n; ++v) {
      if (f.span & (1u << v)) continue;  // dependent
      std::uint32_t grown = f.span;
      for (int x = 0; x < n; ++x) {
        if (f.span & (1u << x)) grown |= 1u << (x ^ v);
      }
      stack.push_back({grown, v + 1, f.depth + 1});
    }
  }
  std::vector<std::uint32_t> out;
  out.reserve(spans.size());
  for (std::uint32_t s : spans) out.push_back(s >> 1);  // drop vector 0; item j = vector j+1
  return out;
}

StackedFunction::StackedFunction(int levels) : L_(levels) {
  if (levels < 0) throw InputError("stacked function needs L >= 0");
  if (levels > 2) throw CapabilityError("stacked function is sized for L <= 2");
  m_ = 1 << (1 << L_);
  gaps_.reserve(L_ + 1);
  levels_.resize(L_ + 1);
  for (int ell = 0; ell <= L_; ++ell) {
    Level& lv = levels_[ell];
    lv.k = 1 << ell;
    lv.block_size = (1 << lv.k) - 1;
    lv.gap_index = static_cast<int>(gaps_.size());
    gaps_.emplace_back(lv.k);
    int blocks = m_ / (1 << lv.k);
    lv.offsets.resize(blocks);
    for (int b = 0; b < blocks; ++b) lv.offsets[b] = b * lv.block_size;
  }
}

double StackedFunction::level_value(int ell, std::uint32_t s) const {
  const Level& lv = levels_[ell];
  const GapFunction& g = gaps_[lv.gap_index];
  const std::uint32_t mask = (1u << lv.block_size) - 1u;
  double sum = 0.0;
  for (int off : lv.offsets) sum += g.value((s >> off) & mask);
  return sum / (static_cast<double>(lv.offsets.size()) * lv.k);
}

double StackedFunction::value(std::uint32_t s) const {
  double total = 0.0;
  for (int ell = 0; ell <= L_; ++ell) total += level_value(ell, s);
  return total;
}

}  // namespace subauction
