#include "subauction/welfare_lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "subauction/errors.hpp"
#include "subauction/simplex.hpp"

namespace subauction {

namespace {

constexpr double kDualityTol = 1e-6;
constexpr double kWeightEps = 1e-12;

void check_items(const std::vector<Valuation>& vals, const MarginalCaps& caps) {
  if (vals.empty()) throw InputError("configuration LP needs at least one agent");
  int m = vals[0].num_items();
  for (const Valuation& v : vals) {
    if (v.num_items() != m) throw InputError("agents disagree on the item count");
  }
  if (caps.size() != m) throw InputError("marginal caps have the wrong length");
  caps.validate();
}

ConfigLpSolution solve_config_dense(const std::vector<Valuation>& vals, const MarginalCaps& caps) {
  const int n = static_cast<int>(vals.size());
  const int m = vals[0].num_items();
  const std::uint32_t nsets = (1u << m) - 1u;  // nonempty sets
  if (static_cast<double>(n) * nsets > 400000.0) {
    throw CapabilityError("dense configuration LP exceeds the column budget");
  }

  LpProblem lp;
  for (int i = 0; i < n; ++i) {
    for (std::uint32_t s = 1; s <= nsets; ++s) {
      lp.add_var(vals[i].value(ItemSet(s)));
    }
  }
  auto var_id = [&](int i, std::uint32_t s) { return i * static_cast<int>(nsets) + static_cast<int>(s) - 1; };

  for (int j = 0; j < m; ++j) {
    std::vector<std::pair<int, double>> coef;
    for (int i = 0; i < n; ++i) {
      for (std::uint32_t s = 1; s <= nsets; ++s) {
        if ((s >> j) & 1u) coef.emplace_back(var_id(i, s), 1.0);
      }
    }
    lp.add_row(Rel::le, caps.q[j], std::move(coef));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> coef;
    for (std::uint32_t s = 1; s <= nsets; ++s) coef.emplace_back(var_id(i, s), 1.0);
    lp.add_row(Rel::le, 1.0, std::move(coef));
  }

  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) {
    throw NumericError("dense configuration LP did not reach an optimum");
  }

  ConfigLpSolution out;
  out.objective = sol.objective;
  out.dual_objective = sol.dual_objective(lp);
  out.y.assign(sol.y.begin(), sol.y.begin() + m);
  out.u.assign(sol.y.begin() + m, sol.y.begin() + m + n);
  for (int i = 0; i < n; ++i) {
    for (std::uint32_t s = 1; s <= nsets; ++s) {
      double w = sol.x[var_id(i, s)];
      if (w > kWeightEps) out.columns.push_back({i, ItemSet(s), w});
    }
  }
  if (std::fabs(out.objective - out.dual_objective) > kDualityTol) {
    throw NumericError("configuration LP duality gap exceeds tolerance");
  }
  return out;
}

ConfigLpSolution solve_config_colgen(const std::vector<Valuation>& vals,
                                     const MarginalCaps& caps) {
  const int n = static_cast<int>(vals.size());
  const int m = vals[0].num_items();

  // Restricted master over a growing set of (agent, bundle) columns; the
  // separation oracle is one demand query per agent at the item duals.
  std::vector<std::pair<int, ItemSet>> cols;
  std::map<std::pair<int, std::uint32_t>, int> col_index;
  PriceVector zero = PriceVector::zeros(m);
  ItemSet all = ItemSet::full(m);
  for (int i = 0; i < n; ++i) {
    ItemSet seed = vals[i].demand(zero, all).set;
    if (seed.empty()) seed = all;
    col_index[{i, seed.bits()}] = static_cast<int>(cols.size());
    cols.emplace_back(i, seed);
  }

  for (int round = 0; round < 10000; ++round) {
    LpProblem lp;
    for (auto& [i, s] : cols) lp.add_var(vals[i].value(s));
    for (int j = 0; j < m; ++j) {
      std::vector<std::pair<int, double>> coef;
      for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        if (cols[c].second.contains(j)) coef.emplace_back(c, 1.0);
      }
      lp.add_row(Rel::le, caps.q[j], std::move(coef));
    }
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> coef;
      for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        if (cols[c].first == i) coef.emplace_back(c, 1.0);
      }
      lp.add_row(Rel::le, 1.0, std::move(coef));
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) {
      throw NumericError("restricted configuration LP did not reach an optimum");
    }
    std::vector<double> y(sol.y.begin(), sol.y.begin() + m);
    std::vector<double> u(sol.y.begin() + m, sol.y.begin() + m + n);
    for (double& v : y) v = std::max(v, 0.0);

    // Add every agent's violated bundle; demand at the item duals is the
    // separation oracle for the dual constraints v_i(S) <= u_i + y(S).
    bool any_violation = false;
    bool any_new = false;
    PriceVector dual_prices{std::vector<double>(y)};
    for (int i = 0; i < n; ++i) {
      DemandResult d = vals[i].demand(dual_prices, all);
      if (d.utility - u[i] > 1e-9) {
        any_violation = true;
        auto key = std::make_pair(i, d.set.bits());
        if (!col_index.count(key)) {
          col_index[key] = static_cast<int>(cols.size());
          cols.emplace_back(i, d.set);
          any_new = true;
        }
      }
    }
    if (!any_violation) {
      ConfigLpSolution out;
      out.objective = sol.objective;
      out.dual_objective = sol.dual_objective(lp);
      out.y = std::move(y);
      out.u = std::move(u);
      for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        if (sol.x[c] > kWeightEps) out.columns.push_back({cols[c].first, cols[c].second, sol.x[c]});
      }
      if (std::fabs(out.objective - out.dual_objective) > kDualityTol) {
        throw NumericError("configuration LP duality gap exceeds tolerance");
      }
      return out;
    }
    if (!any_new) {
      throw NumericError("configuration LP column generation stalled on a repeated column");
    }
  }
  throw NumericError("configuration LP column generation did not converge");
}

}  // namespace

MarginalCaps MarginalCaps::uniform(int m, double value) {
  MarginalCaps c;
  c.q.assign(m, value);
  c.validate();
  return c;
}

void MarginalCaps::validate() const {
  for (double v : q) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InputError("marginal caps must lie in [0, 1]");
    }
  }
}

nlohmann::json ConfigLpSolution::to_json() const {
  nlohmann::json j;
  j["objective"] = objective;
  j["dual_objective"] = dual_objective;
  j["item_duals"] = y;
  j["agent_duals"] = u;
  nlohmann::json cols = nlohmann::json::array();
  for (const ConfigColumn& c : columns) {
    cols.push_back({{"agent", c.agent}, {"items", c.set.items()}, {"weight", c.weight}});
  }
  j["columns"] = std::move(cols);
  return j;
}

ConfigLpSolution solve_config_lp(const std::vector<Valuation>& vals, const MarginalCaps& caps,
                                 LpRoute route) {
  check_items(vals, caps);
  int m = vals[0].num_items();
  if (route == LpRoute::automatic) {
    double cols = static_cast<double>(vals.size()) * ((1u << std::min(m, 20)) - 1u);
    route = (m <= 14 && cols <= 60000.0) ? LpRoute::dense : LpRoute::column_generation;
  }
  return route == LpRoute::dense ? solve_config_dense(vals, caps) : solve_config_colgen(vals, caps);
}

double f_value(const Valuation& v, double q, LpRoute route) {
  return solve_config_lp({v}, MarginalCaps::uniform(v.num_items(), q), route).objective;
}

std::optional<SeparationResult> dual_separation(const std::vector<Valuation>& vals,
                                                const std::vector<double>& y,
                                                const std::vector<double>& u, double tol) {
  if (vals.empty() || u.size() != vals.size()) throw InputError("dual separation: bad duals");
  int m = vals[0].num_items();
  if (static_cast<int>(y.size()) != m) throw InputError("dual separation: bad item duals");
  PriceVector prices{std::vector<double>(y)};
  ItemSet all = ItemSet::full(m);
  std::optional<SeparationResult> best;
  for (int i = 0; i < static_cast<int>(vals.size()); ++i) {
    DemandResult d = vals[i].demand(prices, all);
    double viol = d.utility - u[i];
    if (viol > tol && (!best || viol > best->violation)) {
      best = SeparationResult{i, d.set, viol};
    }
  }
  return best;
}

Allocation opt_welfare(const std::vector<Valuation>& vals, int m) {
  if (vals.empty()) throw InputError("opt_welfare needs at least one agent");
  for (const Valuation& v : vals) {
    if (v.num_items() != m) throw InputError("opt_welfare: item count mismatch");
  }
  const int n = static_cast<int>(vals.size());
  ItemSet all = ItemSet::full(m);
  if (n == 1) {
    return Allocation{vals[0].value(all), {all}};
  }
  if (m > 14) throw CapabilityError("opt_welfare DP is sized for m <= 14 with several agents");

  const std::uint32_t size = 1u << m;
  std::vector<double> prev(size, 0.0), cur(size, 0.0);
  std::vector<std::vector<std::uint32_t>> choice(n, std::vector<std::uint32_t>(size, 0));
  for (int i = 0; i < n; ++i) {
    std::vector<double> vt = vals[i].full_table();
    for (std::uint32_t s = 0; s < size; ++s) {
      double best = -1.0;
      std::uint32_t pick = 0;
      for_each_subset(s, [&](std::uint32_t sub) {
        double cand = vt[sub] + prev[s & ~sub];
        if (cand > best) {
          best = cand;
          pick = sub;
        }
      });
      cur[s] = best;
      choice[i][s] = pick;
    }
    std::swap(prev, cur);
  }

  Allocation out;
  out.welfare = prev[size - 1];
  out.bundles.assign(n, ItemSet());
  std::uint32_t rem = size - 1;
  for (int i = n - 1; i >= 0; --i) {
    std::uint32_t pick = choice[i][rem];
    out.bundles[i] = ItemSet(pick);
    rem &= ~pick;
  }
  return out;
}

void InterimCaps::validate(const Instance& inst) const {
  if (static_cast<int>(z.size()) != inst.num_agents()) {
    throw InputError("interim caps: agent count mismatch");
  }
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (static_cast<int>(z[i].size()) != inst.agents[i].support_size()) {
      throw InputError("interim caps: support size mismatch");
    }
    for (const auto& row : z[i]) {
      if (static_cast<int>(row.size()) != inst.m) {
        throw InputError("interim caps: item count mismatch");
      }
      for (double v : row) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0 + 1e-9) {
          throw InputError("interim caps must lie in [0, 1]");
        }
      }
    }
  }
}

InterimCaps InterimCaps::uniform(const Instance& inst, double value) {
  InterimCaps c;
  c.z.resize(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    c.z[i].assign(inst.agents[i].support_size(), std::vector<double>(inst.m, value));
  }
  c.validate(inst);
  return c;
}

namespace {

BayesLpSolution solve_bayes_dense(const Instance& inst, const std::vector<Profile>& profiles,
                                  const MarginalCaps* agg, const InterimCaps* interim,
                                  double scale) {
  inst.validate();
  const int n = inst.num_agents();
  const int m = inst.m;
  const std::uint32_t nsets = (1u << m) - 1u;
  double total_cols = static_cast<double>(profiles.size()) * n * nsets;
  if (total_cols > 300000.0) {
    throw CapabilityError("profile-level configuration LP exceeds the column budget");
  }

  LpProblem lp;
  auto var_id = [&](int pr, int i, std::uint32_t s) {
    return (pr * n + i) * static_cast<int>(nsets) + static_cast<int>(s) - 1;
  };
  for (int pr = 0; pr < static_cast<int>(profiles.size()); ++pr) {
    for (int i = 0; i < n; ++i) {
      const Valuation& v = profile_valuation(inst, profiles[pr], i);
      std::vector<double> vt = v.full_table();
      for (std::uint32_t s = 1; s <= nsets; ++s) {
        lp.add_var(profiles[pr].prob * vt[s]);
      }
    }
  }
  // Per (profile, agent) unit mass.
  for (int pr = 0; pr < static_cast<int>(profiles.size()); ++pr) {
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> coef;
      for (std::uint32_t s = 1; s <= nsets; ++s) coef.emplace_back(var_id(pr, i, s), 1.0);
      lp.add_row(Rel::le, 1.0, std::move(coef));
    }
  }
  if (agg != nullptr) {
    for (int j = 0; j < m; ++j) {
      std::vector<std::pair<int, double>> coef;
      for (int pr = 0; pr < static_cast<int>(profiles.size()); ++pr) {
        for (int i = 0; i < n; ++i) {
          for (std::uint32_t s = 1; s <= nsets; ++s) {
            if ((s >> j) & 1u) coef.emplace_back(var_id(pr, i, s), profiles[pr].prob);
          }
        }
      }
      lp.add_row(Rel::le, agg->q[j], std::move(coef));
    }
  } else {
    // Interim rows: condition on agent i's atom.
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < inst.agents[i].support_size(); ++a) {
        double pa = inst.agents[i].atom(a).p;
        if (pa <= 0.0) continue;
        for (int j = 0; j < m; ++j) {
          std::vector<std::pair<int, double>> coef;
          for (int pr = 0; pr < static_cast<int>(profiles.size()); ++pr) {
            if (profiles[pr].atom[i] != a) continue;
            double cond = profiles[pr].prob / pa;
            for (std::uint32_t s = 1; s <= nsets; ++s) {
              if ((s >> j) & 1u) coef.emplace_back(var_id(pr, i, s), cond);
            }
          }
          lp.add_row(Rel::le, scale * interim->z[i][a][j], std::move(coef));
        }
      }
    }
  }

  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) {
    throw NumericError("profile-level configuration LP did not reach an optimum");
  }
  BayesLpSolution out;
  out.objective = sol.objective;
  out.dual_objective = sol.dual_objective(lp);
  if (std::fabs(out.objective - out.dual_objective) > kDualityTol) {
    throw NumericError("profile-level configuration LP duality gap exceeds tolerance");
  }
  for (int pr = 0; pr < static_cast<int>(profiles.size()); ++pr) {
    for (int i = 0; i < n; ++i) {
      for (std::uint32_t s = 1; s <= nsets; ++s) {
        double w = sol.x[var_id(pr, i, s)];
        if (w > kWeightEps) out.columns.push_back({pr, i, ItemSet(s), w});
      }
    }
  }
  return out;
}

}  // namespace

BayesLpSolution solve_bayes_config_lp(const Instance& inst, const std::vector<Profile>& profiles,
                                      const MarginalCaps& caps) {
  if (caps.size() != inst.m) throw InputError("aggregate caps have the wrong length");
  caps.validate();
  return solve_bayes_dense(inst, profiles, &caps, nullptr, 1.0);
}

BayesLpSolution solve_bayes_config_lp(const Instance& inst, const std::vector<Profile>& profiles,
                                      const InterimCaps& caps, double scale) {
  caps.validate(inst);
  if (!(scale >= 0.0) || scale > 1.0) throw InputError("interim cap scale must lie in [0, 1]");
  return solve_bayes_dense(inst, profiles, nullptr, &caps, scale);
}

}  // namespace subauction
