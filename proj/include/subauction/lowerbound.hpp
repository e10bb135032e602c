#pragma once

#include <cstdint>
#include <vector>

#include "subauction/game.hpp"
#include "subauction/gapfn.hpp"
#include "subauction/itemset.hpp"
#include "subauction/valuation.hpp"

namespace subauction {

// Cover count of t under the gap function (0 for the empty set).
double gap_value(const GapFunction& g, ItemSet t);

// The layered construction showing that equal-marginal strategies lose a
// log log m factor: the valuation plus the block structure the adversary
// distribution is built from.
struct StackedValuation {
  int L = 0;
  Valuation v;                // kind stacked, m = 2^(2^L) items
  StackedFunction structure;  // block layout per level

  int num_items() const { return structure.num_items(); }
};

StackedValuation build_lower_bound(int L);  // 1 <= L <= 2

// Threshold level: ceil(log2 log2 (1/q)), clamped at 0.
int adversary_lstar(double q);

// Subspace dimension removed per block at level ell; 0 at or below lstar,
// otherwise floor(2^lstar * (2^x - 1.5^x)) with x = ell - lstar.
int adversary_dimension(int ell, int lstar);

// The adversary's removal distribution: every level above lstar removes one
// uniformly chosen subspace set (at the prescribed dimension) per block;
// T is the union across blocks. Exact product expansion while the atom count
// stays at or below 100000, otherwise `samples` seeded draws. Per-item
// marginals are <= q + 1e-9 (re-verified in the sampled route). lstar >= L
// yields a point mass on the empty set.
SetDistribution adversary_mu(const StackedValuation& sv, double q, std::uint64_t seed,
                             int samples = 20000);

// Max over lambda in the cap-q simplex of E_{T~mu}[v(S \ T)]. Fixing the
// antagonist can only help the protagonist, so this upper-bounds the game
// value at cap q.
double best_response_value(const StackedValuation& sv, double q, const SetDistribution& mu);

// Closed-form accounting from the construction's proof, an upper bound on
// what any cap-q strategy extracts against the adversary: levels below lstar
// contribute q * (2^(2^ell) - 1) / 2^ell, the threshold level 1, and each
// level above it (2^ell - d_ell) / 2^ell.
double proof_bound(const StackedValuation& sv, double q);

}  // namespace subauction
