#include "subauction/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "subauction/errors.hpp"
#include "subauction/rng.hpp"
#include "subauction/simplex.hpp"

namespace subauction {

double gap_value(const GapFunction& g, ItemSet t) {
  if (t.bits() >> g.num_items()) {
    throw InputError("set has items outside the gap function's ground set");
  }
  return static_cast<double>(g.value(t.bits()));
}

StackedValuation build_lower_bound(int L) {
  if (L < 1) throw InputError("the construction needs at least one level");
  if (L > 2) throw CapabilityError("levels above 2 exceed the exact-game item budget");
  return StackedValuation{L, Valuation::stacked(L), StackedFunction(L)};
}

int adversary_lstar(double q) {
  if (!(q > 0.0) || !(q < 1.0)) throw InputError("cap q must lie in (0, 1)");
  const double inner = std::log2(1.0 / q);
  if (inner <= 1.0) return 0;  // q >= 1/2
  return std::max(0, static_cast<int>(std::ceil(std::log2(inner) - 1e-9)));
}

int adversary_dimension(int ell, int lstar) {
  if (ell <= lstar) return 0;
  const int x = ell - lstar;
  const double raw = std::ldexp(1.0, lstar) * (std::ldexp(1.0, x) - std::pow(1.5, x));
  return static_cast<int>(std::floor(raw));
}

namespace {

// Per-(level, block) choice list: equally likely masks already shifted into
// the block's item range.
struct BlockChoices {
  std::vector<std::uint32_t> masks;
};

std::vector<BlockChoices> adversary_blocks(const StackedValuation& sv, int lstar) {
  std::vector<BlockChoices> out;
  for (int ell = lstar + 1; ell <= sv.L; ++ell) {
    const int d = adversary_dimension(ell, lstar);
    if (d == 0) continue;  // removing a 0-dimensional subspace removes nothing
    const StackedFunction::Level& lvl = sv.structure.level(ell);
    const std::vector<std::uint32_t> family = subspace_family(lvl.k, d);
    for (int off : lvl.offsets) {
      BlockChoices bc;
      bc.masks.reserve(family.size());
      for (std::uint32_t f : family) bc.masks.push_back(f << off);
      out.push_back(std::move(bc));
    }
  }
  return out;
}

}  // namespace

SetDistribution adversary_mu(const StackedValuation& sv, double q, std::uint64_t seed,
                             int samples) {
  const int lstar = adversary_lstar(q);
  if (lstar >= sv.L) return SetDistribution::point_mass(ItemSet());
  const std::vector<BlockChoices> blocks = adversary_blocks(sv, lstar);
  if (blocks.empty()) return SetDistribution::point_mass(ItemSet());

  double combinations = 1.0;
  for (const BlockChoices& bc : blocks) combinations *= static_cast<double>(bc.masks.size());

  SetDistribution mu;
  if (combinations <= 1e5) {
    // Exact product expansion, merging unions that coincide.
    std::map<std::uint32_t, double> atom;
    std::vector<std::size_t> idx(blocks.size(), 0);
    const double prob = 1.0 / combinations;
    while (true) {
      std::uint32_t u = 0;
      for (std::size_t b = 0; b < blocks.size(); ++b) u |= blocks[b].masks[idx[b]];
      atom[u] += prob;
      std::size_t b = 0;
      while (b < blocks.size() && ++idx[b] == blocks[b].masks.size()) {
        idx[b] = 0;
        ++b;
      }
      if (b == blocks.size()) break;
    }
    for (const auto& [mask, p] : atom) mu.atoms.emplace_back(ItemSet(mask), p);
  } else {
    if (samples <= 0) throw InputError("sample count must be positive");
    std::map<std::uint32_t, double> atom;
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
      std::uint32_t u = 0;
      for (const BlockChoices& bc : blocks) u |= bc.masks[rng.index(bc.masks.size())];
      atom[u] += 1.0 / samples;
    }
    for (const auto& [mask, p] : atom) mu.atoms.emplace_back(ItemSet(mask), p);
    // Sampling noise could push an empirical marginal past the cap the
    // construction promises; that must not pass silently.
    for (int j = 0; j < sv.num_items(); ++j) {
      if (mu.marginal(j) > q + 1e-9) {
        throw NumericError("sampled adversary marginal exceeds the cap; raise `samples`");
      }
    }
  }
  return mu;
}

double best_response_value(const StackedValuation& sv, double q, const SetDistribution& mu) {
  if (!(q > 0.0) || q > 1.0) throw InputError("cap q must lie in (0, 1]");
  const int m = sv.num_items();
  if (m > 16) throw CapabilityError("best response enumeration handles at most 16 items");
  for (const auto& [t, p] : mu.atoms) {
    if (t.bits() >> m) throw InputError("adversary set has items outside the ground set");
    if (p < -1e-12) throw InputError("adversary probabilities must be nonnegative");
  }

  // c_S = E_T[v(S \ T)] decomposes over blocks: project mu onto each block,
  // precompute E[f_b(s_b \ t_b)] per block-local s_b, then sum.
  const std::uint32_t full = (1u << m) - 1u;
  std::vector<double> c(std::size_t{1} << m, 0.0);
  for (int ell = 0; ell <= sv.L; ++ell) {
    const StackedFunction::Level& lvl = sv.structure.level(ell);
    const GapFunction& g = sv.structure.level_gap(ell);
    const std::uint32_t mask = (1u << lvl.block_size) - 1u;
    const double weight = 1.0 / (static_cast<double>(lvl.offsets.size()) * lvl.k);
    for (int off : lvl.offsets) {
      std::map<std::uint32_t, double> local;  // distribution of T inside the block
      for (const auto& [t, p] : mu.atoms) local[(t.bits() >> off) & mask] += p;
      std::vector<double> expect(std::size_t{1} << lvl.block_size, 0.0);
      for (std::uint32_t s = 0; s <= mask; ++s) {
        double acc = 0.0;
        for (const auto& [t, p] : local) acc += p * g.value(s & ~t);
        expect[s] = acc;
      }
      for (std::uint32_t s = 0; s <= full; ++s) {
        c[s] += weight * expect[(s >> off) & mask];
      }
    }
  }

  LpProblem lp;
  for (std::uint32_t s = 0; s <= full; ++s) lp.add_var(c[s]);
  {
    std::vector<std::pair<int, double>> coef;
    coef.reserve(full + 1);
    for (std::uint32_t s = 0; s <= full; ++s) coef.emplace_back(static_cast<int>(s), 1.0);
    lp.add_row(Rel::eq, 1.0, std::move(coef));
  }
  for (int j = 0; j < m; ++j) {
    std::vector<std::pair<int, double>> coef;
    for (std::uint32_t s = 0; s <= full; ++s) {
      if ((s >> j) & 1u) coef.emplace_back(static_cast<int>(s), 1.0);
    }
    lp.add_row(Rel::le, q, std::move(coef));
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) {
    throw NumericError("best response LP failed to solve");
  }
  return sol.objective;
}

double proof_bound(const StackedValuation& sv, double q) {
  const int lstar = adversary_lstar(q);
  double total = 0.0;
  for (int ell = 0; ell <= sv.L; ++ell) {
    if (ell < lstar) {
      const double block_size = std::ldexp(1.0, 1 << ell) - 1.0;
      total += q * block_size / std::ldexp(1.0, ell);
    } else if (ell == lstar) {
      total += 1.0;
    } else {
      const double k = std::ldexp(1.0, ell);
      total += (k - adversary_dimension(ell, lstar)) / k;
    }
  }
  return total;
}

}  // namespace subauction
