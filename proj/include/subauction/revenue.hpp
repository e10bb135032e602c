#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "subauction/instance.hpp"
#include "subauction/itemset.hpp"
#include "subauction/mechsim.hpp"
#include "subauction/prices.hpp"
#include "subauction/valuation.hpp"
#include "subauction/welfare_lp.hpp"

namespace subauction {

// inf{x >= 0 : sum_j Pr[v(j) >= beta_j + x] <= 1/2} on a finite support,
// found by scanning the critical values v_a(j) - beta_j.
double cutoff_c(const ValuationDistribution& D, const std::vector<double>& beta);

// inf{x >= 0 : sum_j Pr[v(j) >= max(beta_j, p_j + x)] <= 1/2}.
double tau(const ValuationDistribution& D, const PriceVector& p, const std::vector<double>& beta);

// Per-agent cutoffs splitting values into core and tail.
struct Thresholds {
  std::vector<std::vector<double>> beta;  // [agent][item], >= 0
  std::vector<double> c;                  // per agent, computed by cutoff_c
  double b = 0.5;

  nlohmann::json to_json() const;
};

// Computes c from beta; beta may be empty for all-zeros.
Thresholds make_thresholds(const Instance& inst, std::vector<std::vector<double>> beta, double b);

std::vector<std::vector<double>> zero_beta(const Instance& inst);

// v'(S) = v(S intersect C), C = {j : v(j) < beta_j + c}. Table-backed.
Valuation core_restrict(const Valuation& v, const std::vector<double>& beta, double c);

// vhat(S) = v(S intersect Y), Y = {j : v(j) < p_j + tau}. Table-backed.
Valuation hat_restrict(const Valuation& v, const PriceVector& p, double tau);

// max_{S' subseteq S} vhat(S') - p(S'); always >= 0 (S' may be empty).
double surplus(const Valuation& v_hat, const PriceVector& p, ItemSet s);

// The surplus function mu_i(v_i, .) for one realized valuation: monotone,
// subadditive, and tau-Lipschitz in set difference.
struct SurplusFunction {
  int agent = 0;
  PriceVector prices;
  double tau = 0.0;
  Valuation v_hat;

  double mu(ItemSet s) const { return surplus(v_hat, prices, s); }
};

SurplusFunction make_surplus(int agent, const ValuationDistribution& D, const Valuation& realized,
                             const PriceVector& p, const std::vector<double>& beta);

// Lower median of mu_i(v_i, S) over the support of D (smallest support value
// t with Pr[mu <= t] >= 1/2). beta empty means zeros.
double median_entry_fee(const ValuationDistribution& D, const PriceVector& p, ItemSet s,
                        const std::vector<double>& beta = {});

// One execution of the anonymous sequential posted-price mechanism with
// entry fees: agent i sees the remaining items S_i, is quoted the median
// entry fee for S_i, pays it iff mu_i(v_i, S_i) reaches the fee, and then
// buys a surplus-maximizing subset at the item prices.
struct AspeRun {
  std::vector<ItemSet> allocation;
  std::vector<double> utilities;     // true-valuation utility net of payments
  std::vector<double> fees;          // quoted entry fee per agent
  std::vector<bool> paid;            // whether the agent paid its fee
  std::vector<double> surplus_seen;  // mu_i(v_i, S_i) at arrival
  double fee_revenue = 0.0;
  double item_revenue = 0.0;
  double revenue = 0.0;  // fees + item payments
  double welfare = 0.0;  // sum of v_i(allocation_i)
  ItemSet sold;
  std::vector<int> order;

  nlohmann::json to_json() const;
};

// Fixed profile (one support atom index per agent).
AspeRun run_aspe(const Instance& inst, const PriceVector& p,
                 const std::vector<std::vector<double>>& beta, const std::vector<int>& order,
                 const std::vector<int>& atoms);
// One seeded draw from the instance.
AspeRun run_aspe_sampled(const Instance& inst, const PriceVector& p,
                         const std::vector<std::vector<double>>& beta,
                         const std::vector<int>& order, std::uint64_t seed);

// Exact expectations over the enumerated profile support.
struct AspeSummary {
  double expected_fee_revenue = 0.0;
  double expected_item_revenue = 0.0;
  double expected_revenue = 0.0;
  double expected_welfare = 0.0;
  std::vector<double> expected_surplus;  // E[mu_i(v_i, S_i(v))] per agent
  std::vector<double> taus;              // per agent

  nlohmann::json to_json() const;
};

AspeSummary run_aspe_exact(const Instance& inst, const PriceVector& p,
                           const std::vector<std::vector<double>>& beta = {},
                           const std::vector<int>& order = {});

// Exact check of the median-fee revenue bound
//   FeeRev >= (1/4) sum_i E[mu_i(v_i, S_i(v))] - (5/8) sum_i tau_i.
struct EntryFeeBound {
  double fee_revenue = 0.0;
  double surplus_total = 0.0;  // sum_i E[mu_i(v_i, S_i(v))]
  double tau_total = 0.0;
  double slack = 0.0;  // fee_revenue - surplus_total/4 + 5*tau_total/8

  nlohmann::json to_json() const;
};

EntryFeeBound entry_fee_bound_check(const Instance& inst, const PriceVector& p,
                                    const std::vector<int>& order = {},
                                    const std::vector<std::vector<double>>& beta = {});

// Sequential personalized-price mechanism selling at most one item per
// buyer: buy the remaining item maximizing v_i(j) - p[i][j] when that
// utility is strictly positive (ties: higher value, then smaller id).
MechanismRun run_rspm(const std::vector<Valuation>& vals,
                      const std::vector<std::vector<double>>& prices,
                      const std::vector<int>& order);
double expected_rspm_revenue(const Instance& inst, const std::vector<std::vector<double>>& prices,
                             const std::vector<int>& order = {});

// Externally supplied interim allocation rule: sigma[i][a] is a
// sub-distribution over sets for agent i when its support atom is a.
struct InterimAllocation {
  std::vector<std::vector<std::vector<std::pair<ItemSet, double>>>> sigma;

  void validate(const Instance& inst) const;
  double pi(int i, int a, int j) const;  // item marginal sum_{S ni j} sigma_S
  InterimCaps to_caps(const Instance& inst) const;

  nlohmann::json to_json() const;
  static InterimAllocation from_json(const nlohmann::json& j, const Instance& inst);
};

// c(b) = (1/4) * 2b(1-b) / (8b - 2b^2 + 1), b in (0,1).
double tradeoff_constant(double b);

// The revenue machinery assumes per-item independence inside each agent's
// distribution; this checks pairwise singleton-value independence and
// reports the offending pairs.
struct IndependenceReport {
  bool independent = true;
  std::vector<std::string> warnings;
};

IndependenceReport check_item_independence(const Instance& inst, double tol = 1e-9);

}  // namespace subauction
