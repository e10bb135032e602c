#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "subauction/game.hpp"
#include "subauction/instance.hpp"
#include "subauction/prices.hpp"

namespace subauction {

// One execution of the sequential posted-price mechanism.
struct MechanismRun {
  std::vector<ItemSet> allocation;  // per agent, pairwise disjoint
  std::vector<double> utilities;    // per agent, each >= 0
  double revenue = 0.0;
  double welfare = 0.0;  // sum of v_i(allocation_i) = utilities + revenue
  ItemSet sold;
  std::vector<int> order;

  nlohmann::json to_json() const;
};

// Agents arrive in `order`; each buys a utility-maximizing subset of the
// remaining for-sale items (ties prefer higher value, then the smallest
// mask, so zero-utility buyers still buy).
MechanismRun run_posted_price(const std::vector<Valuation>& vals, const PriceVector& p,
                              const std::vector<int>& order);

// Expected mechanism welfare. An empty `order` means the instance's arrival
// order. Exact mode enumerates the profile support; Monte Carlo draws
// profiles from per-sample substreams and reduces in index order.
double expected_welfare_exact(const Instance& inst, const PriceVector& p,
                              const std::vector<int>& order = {});
double expected_welfare_mc(const Instance& inst, const PriceVector& p,
                           const std::vector<int>& order, int n_samples, std::uint64_t seed);

// Expected optimal welfare E[OPT], by the allocation DP per profile.
// Monte Carlo evaluation deduplicates repeated profiles before solving.
double expected_opt_welfare_exact(const Instance& inst);
double expected_opt_welfare_mc(const Instance& inst, int n_samples, std::uint64_t seed);

// E[OPT] / E[ALG]; +infinity when the mechanism welfare is zero. The Monte
// Carlo variant pairs both expectations on the same sampled profiles.
double competitive_ratio_exact(const Instance& inst, const PriceVector& p,
                               const std::vector<int>& order = {});
double competitive_ratio_mc(const Instance& inst, const PriceVector& p,
                            const std::vector<int>& order, int n_samples, std::uint64_t seed);

// Both sides of the utility lower bound
//   sum_i E[u_i] >= (1/alpha) E[OPT] - E_{v'}[p(SOLD(v'))],
// evaluated exactly over the product of two independent profile draws via
// the hallucination quantity in the middle:
//   E_{v,v'}[sum_{i,S} lambda^{i,v}_S (v_i(S \ SOLD(v')) - p(S))].
struct UtilityBoundReport {
  double expected_utilities = 0.0;   // left side
  double hallucinated = 0.0;         // middle quantity
  double guarantee = 0.0;            // right side
  double hallucination_slack = 0.0;  // left - middle
  double key_slack = 0.0;            // middle - right
  double slack = 0.0;                // left - right
  double expected_opt = 0.0;
  double expected_sold_prices = 0.0;

  nlohmann::json to_json() const;
};

// lambdas[profile][agent] follows enumerate_profiles order; sub-probability
// mass is allowed (the remainder sits on the empty set). alpha may be
// +infinity, which zeroes the E[OPT] term.
UtilityBoundReport verify_utility_bound(const Instance& inst, const PriceVector& p,
                                        const std::vector<std::vector<SetDistribution>>& lambdas,
                                        double alpha, const std::vector<int>& order = {});

}  // namespace subauction
