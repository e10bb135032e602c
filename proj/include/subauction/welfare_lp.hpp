#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "subauction/instance.hpp"
#include "subauction/itemset.hpp"
#include "subauction/valuation.hpp"

namespace subauction {

// Per-item marginal caps in [0, 1].
struct MarginalCaps {
  std::vector<double> q;

  static MarginalCaps uniform(int m, double value);
  void validate() const;
  int size() const { return static_cast<int>(q.size()); }
};

struct ConfigColumn {
  int agent = 0;
  ItemSet set;
  double weight = 0.0;
};

// Solution of the fractional configuration LP
//   max sum_{i,S} x^i_S v_i(S)
//   s.t. sum_i sum_{S ni j} x^i_S <= q_j   (dual y_j >= 0)
//        sum_S x^i_S <= 1                  (dual u_i >= 0)
//        x >= 0.
// Strong duality is re-checked at construction.
struct ConfigLpSolution {
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<ConfigColumn> columns;  // nonzero weights only
  std::vector<double> y;              // per item
  std::vector<double> u;              // per agent

  nlohmann::json to_json() const;
};

enum class LpRoute { automatic, dense, column_generation };

ConfigLpSolution solve_config_lp(const std::vector<Valuation>& vals, const MarginalCaps& caps,
                                 LpRoute route = LpRoute::automatic);

// Highest supremum of expected value any single agent can extract under a
// uniform per-item marginal cap q: the single-agent configuration LP.
double f_value(const Valuation& v, double q, LpRoute route = LpRoute::automatic);

struct SeparationResult {
  int agent = 0;
  ItemSet set;
  double violation = 0.0;
};

// Most violated dual constraint v_i(S) <= u_i + y(S), found with one demand
// query per agent. Empty when (y, u) is dual-feasible within tol.
std::optional<SeparationResult> dual_separation(const std::vector<Valuation>& vals,
                                                const std::vector<double>& y,
                                                const std::vector<double>& u, double tol = 1e-9);

struct Allocation {
  double welfare = 0.0;
  std::vector<ItemSet> bundles;
};

// Exact optimal integral allocation of all items. One agent is closed-form;
// otherwise a subset-partition DP over 2^m states (m <= 14).
Allocation opt_welfare(const std::vector<Valuation>& vals, int m);

// Fractional allocation collections over joint valuation profiles:
//   variables lambda^{i,v}_S >= 0 with sum_S lambda^{i,v}_S <= 1 per (i, v).
// Aggregate caps:  E_v[sum_i sum_{S ni j} lambda^{i,v}_S] <= q_j per item.
// Interim caps:    E_{v_-i}[sum_{S ni j} lambda^{i,v}_S] <= scale * z[i][a][j]
//                  per agent i, support atom a, item j.
struct BayesColumn {
  int profile = 0;
  int agent = 0;
  ItemSet set;
  double weight = 0.0;
};

struct BayesLpSolution {
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<BayesColumn> columns;
};

struct InterimCaps {
  // z[i][a][j]: agent i, atom a of its support, item j; values in [0, 1].
  std::vector<std::vector<std::vector<double>>> z;

  void validate(const Instance& inst) const;
  static InterimCaps uniform(const Instance& inst, double value);
};

BayesLpSolution solve_bayes_config_lp(const Instance& inst, const std::vector<Profile>& profiles,
                                      const MarginalCaps& caps);
BayesLpSolution solve_bayes_config_lp(const Instance& inst, const std::vector<Profile>& profiles,
                                      const InterimCaps& caps, double scale = 1.0);

}  // namespace subauction
