#pragma once

#include <vector>

#include <json.hpp>

#include "subauction/itemset.hpp"
#include "subauction/prices.hpp"
#include "subauction/valuation.hpp"

namespace subauction {

// Finite distribution over item sets.
struct SetDistribution {
  std::vector<std::pair<ItemSet, double>> atoms;

  static SetDistribution point_mass(ItemSet s) { return SetDistribution{{{s, 1.0}}}; }

  double total() const;
  double marginal(int j) const;
  // Membership in the cap-q simplex over subsets of U: probabilities >= 0
  // summing to 1 within 1e-9, per-item marginals <= q + tol.
  bool in_simplex(double q, ItemSet U, double tol = 1e-7) const;

  nlohmann::json to_json() const;
};

// E_{S~lambda, T~mu}[v(S \ T)], an exact sum over atom pairs.
double payoff(const Valuation& v, const SetDistribution& lambda, const SetDistribution& mu);

struct GameResult {
  double value = 0.0;
  double q = 0.0;
  SetDistribution lambda_star;
  SetDistribution mu_star;

  nlohmann::json to_json() const;
};

// Exact value of the zero-sum game in which the protagonist picks S ~ lambda,
// the antagonist picks T ~ mu, both subject to per-item marginal caps q, and
// the payoff is v(S \ T). The inner minimization is dualized, giving one LP
//   max theta - q*sum_j z_j
//   s.t. sum_S lambda_S = 1, sum_{S ni j} lambda_S <= q,
//        theta - sum_{j in T} z_j - sum_S lambda_S v(S\T) <= 0 for all T,
// solved by row+column generation with exhaustive separation scans. mu_star
// comes from the T-constraint duals. |U| <= 16.
GameResult game_value(const Valuation& v, ItemSet U, double q);

// Cap schedule [2^(-2^X) for X = 0..l] with l minimal such that 2^(2^l) >= m.
std::vector<double> q_schedule(int m);

// l+1, the schedule length; the guarantee factor is (1/(l+1))(1/2 - 1/m).
int schedule_length(int m);
double guarantee_factor(int m);

struct KeyLemmaCheck {
  ItemSet worst_t;
  double slack = 0.0;  // min over T of p(T) + sum_S lambda_S (v(S\T) - p(S)) - v(U)/alpha
};

// Exhaustive check over all T subset of U. alpha may be +infinity (the
// subtracted term is then 0).
KeyLemmaCheck verify_key_lemma(const Valuation& v, ItemSet U, const PriceVector& p,
                               const SetDistribution& lambda, double alpha);

struct CompleteInfoPricing {
  PriceVector prices;               // +inf on items outside every optimal bundle
  double alpha = 0.0;               // welfare-guarantee factor: per-agent slack >= v_i(U_i)/alpha
  double welfare = 0.0;             // optimal welfare of the profile
  std::vector<ItemSet> bundles;     // optimal partition
  std::vector<double> agent_q;      // chosen cap per agent (0 when skipped)
  std::vector<double> agent_slack;  // certified slack per agent
  std::vector<SetDistribution> agent_lambda;

  nlohmann::json to_json() const;
};

// Complete-information prices: optimal partition, per-agent best cap on the
// schedule by game value, then the slack-maximizing price LP per agent.
CompleteInfoPricing complete_info_prices(const std::vector<Valuation>& vals, int m);

}  // namespace subauction
