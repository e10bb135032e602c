#include "subauction/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "subauction/errors.hpp"
#include "subauction/simplex.hpp"
#include "subauction/welfare_lp.hpp"

namespace subauction {

namespace {

constexpr int kMaxGameItems = 16;
constexpr int kMaxRounds = 20000;

// Values of v on subsets of U, re-indexed so U's items occupy |U| contiguous
// bits. All separation scans below run over these compressed masks.
struct GameTable {
  int k = 0;
  std::vector<int> items;   // compressed bit -> original item id
  std::vector<double> val;  // size 2^k

  std::uint32_t expand(std::uint32_t c) const {
    std::uint32_t raw = 0;
    for (int b = 0; b < k; ++b) {
      if ((c >> b) & 1u) raw |= 1u << items[b];
    }
    return raw;
  }
};

GameTable build_table(const Valuation& v, ItemSet U) {
  if (U.size() > kMaxGameItems) {
    throw CapabilityError("game computations handle at most 16 items per agent");
  }
  GameTable t;
  t.items = U.items();
  t.k = static_cast<int>(t.items.size());
  t.val.assign(std::size_t{1} << t.k, 0.0);
  for (std::uint32_t c = 0; c < t.val.size(); ++c) {
    t.val[c] = v.value(ItemSet(t.expand(c)));
  }
  return t;
}

// sums[t] = sum over bits b in t of per_bit[b], for all 2^k masks.
std::vector<double> subset_sums(const std::vector<double>& per_bit) {
  const int k = static_cast<int>(per_bit.size());
  std::vector<double> sums(std::size_t{1} << k, 0.0);
  for (std::uint32_t t = 1; t < sums.size(); ++t) {
    const int low = std::countr_zero(t);
    sums[t] = sums[t & (t - 1)] + per_bit[low];
  }
  return sums;
}

// c[t] = sum_S lambda_S v(S \ t) for every t, from an explicit support.
std::vector<double> antagonist_payoffs(const GameTable& tab,
                                       const std::vector<std::pair<std::uint32_t, double>>& support) {
  std::vector<double> c(tab.val.size(), 0.0);
  for (std::uint32_t t = 0; t < c.size(); ++t) {
    double acc = 0.0;
    for (const auto& [s, w] : support) acc += w * tab.val[s & ~t];
    c[t] = acc;
  }
  return c;
}

}  // namespace

double SetDistribution::total() const {
  double t = 0.0;
  for (const auto& [s, p] : atoms) t += p;
  return t;
}

double SetDistribution::marginal(int j) const {
  double t = 0.0;
  for (const auto& [s, p] : atoms) {
    if (s.contains(j)) t += p;
  }
  return t;
}

bool SetDistribution::in_simplex(double q, ItemSet U, double tol) const {
  for (const auto& [s, p] : atoms) {
    if (!s.subset_of(U)) return false;
    if (p < -tol) return false;
  }
  if (std::abs(total() - 1.0) > 1e-9) return false;
  for (int j : U.items()) {
    if (marginal(j) > q + tol) return false;
  }
  return true;
}

nlohmann::json SetDistribution::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [s, p] : atoms) {
    arr.push_back({{"set", s.items()}, {"p", p}});
  }
  return arr;
}

double payoff(const Valuation& v, const SetDistribution& lambda, const SetDistribution& mu) {
  double acc = 0.0;
  for (const auto& [s, ps] : lambda.atoms) {
    for (const auto& [t, pt] : mu.atoms) {
      acc += ps * pt * v.value(s - t);
    }
  }
  return acc;
}

nlohmann::json GameResult::to_json() const {
  return {{"value", value}, {"q", q}, {"lambda", lambda_star.to_json()}, {"mu", mu_star.to_json()}};
}

GameResult game_value(const Valuation& v, ItemSet U, double q) {
  if (q < 0.0 || q > 1.0) throw InputError("cap q must lie in [0, 1]");
  if (q == 0.0) {
    // Zero marginals force both players onto the empty set.
    GameResult out;
    out.value = 0.0;
    out.q = 0.0;
    out.lambda_star = SetDistribution::point_mass(ItemSet());
    out.mu_star = SetDistribution::point_mass(ItemSet());
    return out;
  }
  const GameTable tab = build_table(v, U);
  const int k = tab.k;
  const std::uint32_t full = (k == 0) ? 0u : ((1u << k) - 1u);

  std::vector<std::uint32_t> cols;  // candidate protagonist sets S (compressed)
  std::vector<std::uint32_t> rows;  // antagonist constraints T (compressed)
  std::set<std::uint32_t> col_seen, row_seen;
  auto add_col = [&](std::uint32_t s) {
    if (col_seen.insert(s).second) cols.push_back(s);
  };
  auto add_row = [&](std::uint32_t t) {
    if (row_seen.insert(t).second) rows.push_back(t);
  };
  add_col(0u);
  add_col(full);
  add_row(0u);

  for (int round = 0; round < kMaxRounds; ++round) {
    LpProblem lp;
    std::vector<int> lam(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) lam[c] = lp.add_var(0.0);
    std::vector<int> zv(k);
    for (int b = 0; b < k; ++b) zv[b] = lp.add_var(-q);
    const int th = lp.add_var(1.0, /*free_var=*/true);

    {
      std::vector<std::pair<int, double>> coef;
      for (int id : lam) coef.emplace_back(id, 1.0);
      lp.add_row(Rel::eq, 1.0, std::move(coef));
    }
    for (int b = 0; b < k; ++b) {
      std::vector<std::pair<int, double>> coef;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if ((cols[c] >> b) & 1u) coef.emplace_back(lam[c], 1.0);
      }
      lp.add_row(Rel::le, q, std::move(coef));
    }
    for (std::uint32_t t : rows) {
      std::vector<std::pair<int, double>> coef;
      coef.emplace_back(th, 1.0);
      for (int b = 0; b < k; ++b) {
        if ((t >> b) & 1u) coef.emplace_back(zv[b], -1.0);
      }
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double w = tab.val[cols[c] & ~t];
        if (w != 0.0) coef.emplace_back(lam[c], -w);
      }
      lp.add_row(Rel::le, 0.0, std::move(coef));
    }

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) {
      throw NumericError("game master LP failed to solve");
    }

    std::vector<double> z(k, 0.0);
    double z_total = 0.0;
    for (int b = 0; b < k; ++b) {
      z[b] = std::max(0.0, sol.x[zv[b]]);
      z_total += z[b];
    }

    std::vector<std::pair<std::uint32_t, double>> support;
    double lam_total = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (sol.x[lam[c]] > 1e-12) {
        support.emplace_back(cols[c], sol.x[lam[c]]);
        lam_total += sol.x[lam[c]];
      }
    }
    if (std::abs(lam_total - 1.0) > 1e-6) {
      throw NumericError("protagonist mass does not form a probability distribution");
    }
    for (auto& [s, w] : support) w /= lam_total;

    // Row-side certificate: for the current (lambda, z), any theta at most
    // min_T [z(T) + sum_S lambda_S v(S\T)] is feasible, so the game value is
    // at least that minimum minus q*sum(z). The scan over T is exhaustive.
    const std::vector<double> c_t = antagonist_payoffs(tab, support);
    const std::vector<double> z_t = subset_sums(z);
    double min_h = std::numeric_limits<double>::infinity();
    std::uint32_t argmin_t = 0;
    for (std::uint32_t t = 0; t <= full; ++t) {
      const double h = z_t[t] + c_t[t];
      if (h < min_h) {
        min_h = h;
        argmin_t = t;
      }
      if (full == 0) break;
    }
    const double lower_cert = min_h - q * z_total;

    // Column-side certificate: duals give (alpha, beta, mu). For mu scaled to
    // a distribution, max_S [sum_T mu_T v(S\T) - beta(S)] + q*sum(beta) upper
    // bounds the game value. The scan over S is exhaustive.
    std::vector<double> beta(k, 0.0);
    double beta_total = 0.0;
    for (int b = 0; b < k; ++b) {
      beta[b] = std::max(0.0, sol.y[1 + b]);
      beta_total += beta[b];
    }
    std::vector<double> mu(rows.size(), 0.0);
    double mu_total = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      mu[r] = std::max(0.0, sol.y[1 + k + static_cast<int>(r)]);
      mu_total += mu[r];
    }
    if (std::abs(mu_total - 1.0) > 1e-6) {
      throw NumericError("antagonist duals do not form a probability distribution");
    }
    std::vector<std::pair<std::uint32_t, double>> mu_support;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (mu[r] > 1e-12) mu_support.emplace_back(rows[r], mu[r] / mu_total);
    }
    std::vector<double> d_s(tab.val.size(), 0.0);
    for (std::uint32_t s = 0; s <= full; ++s) {
      double acc = 0.0;
      for (const auto& [t, w] : mu_support) acc += w * tab.val[s & ~t];
      d_s[s] = acc;
      if (full == 0) break;
    }
    const std::vector<double> beta_s = subset_sums(beta);
    double max_g = -std::numeric_limits<double>::infinity();
    std::uint32_t argmax_s = 0;
    for (std::uint32_t s = 0; s <= full; ++s) {
      const double g = d_s[s] - beta_s[s];
      if (g > max_g) {
        max_g = g;
        argmax_s = s;
      }
      if (full == 0) break;
    }
    const double upper_cert = max_g + q * beta_total;

    if (std::getenv("SUBAUCTION_GAME_TRACE") && round % 25 == 0) {
      double clipped = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const double yr = sol.y[1 + k + static_cast<int>(r)];
        if (yr < 0.0) clipped += -yr;
      }
      std::fprintf(stderr,
                   "round=%d cols=%zu rows=%zu obj=%.9f lower=%.9f upper=%.9f dualobj=%.9f clip=%.2e\n",
                   round, cols.size(), rows.size(), sol.objective, lower_cert, upper_cert,
                   sol.dual_objective(lp), clipped);
    }
    const double scale = std::max(1.0, std::abs(sol.objective));
    if (upper_cert - lower_cert <= 1e-9 * scale) {
      GameResult res;
      res.q = q;
      res.value = sol.objective;
      for (const auto& [s, w] : support) {
        res.lambda_star.atoms.emplace_back(ItemSet(tab.expand(s)), w);
      }
      if (res.lambda_star.atoms.empty()) {
        res.lambda_star = SetDistribution::point_mass(ItemSet());
      }
      for (const auto& [t, w] : mu_support) {
        res.mu_star.atoms.emplace_back(ItemSet(tab.expand(t)), w);
      }
      if (res.mu_star.atoms.empty()) {
        res.mu_star = SetDistribution::point_mass(ItemSet());
      }
      return res;
    }

    const bool new_row = row_seen.insert(argmin_t).second;
    if (new_row) rows.push_back(argmin_t);
    const bool new_col = col_seen.insert(argmax_s).second;
    if (new_col) cols.push_back(argmax_s);
    if (!new_row && !new_col) {
      if (upper_cert - lower_cert <= 1e-7 * scale) {
        GameResult res;
        res.q = q;
        res.value = sol.objective;
        for (const auto& [s, w] : support) {
          res.lambda_star.atoms.emplace_back(ItemSet(tab.expand(s)), w);
        }
        for (const auto& [t, w] : mu_support) {
          res.mu_star.atoms.emplace_back(ItemSet(tab.expand(t)), w);
        }
        return res;
      }
      throw NumericError("game solver stalled with an uncertified gap");
    }
  }
  throw NumericError("game solver exceeded its round budget");
}

std::vector<double> q_schedule(int m) {
  if (m < 1 || m > kMaxItems) {
    throw InputError("item count out of range: " + std::to_string(m));
  }
  int ell = 0;
  while ((1ull << (1u << ell)) < static_cast<unsigned long long>(m)) ++ell;
  std::vector<double> out;
  out.reserve(ell + 1);
  for (int X = 0; X <= ell; ++X) {
    out.push_back(std::ldexp(1.0, -(1 << X)));  // exact dyadic 2^(-2^X)
  }
  return out;
}

int schedule_length(int m) { return static_cast<int>(q_schedule(m).size()); }

double guarantee_factor(int m) {
  return (0.5 - 1.0 / static_cast<double>(m)) / static_cast<double>(schedule_length(m));
}

KeyLemmaCheck verify_key_lemma(const Valuation& v, ItemSet U, const PriceVector& p,
                               const SetDistribution& lambda, double alpha) {
  if (alpha <= 0.0) throw InputError("alpha must be positive");
  double lambda_prices = 0.0;  // sum_S lambda_S p(S)
  for (const auto& [s, w] : lambda.atoms) lambda_prices += w * p.total(s);
  const double target = std::isinf(alpha) ? 0.0 : v.value(U) / alpha;

  KeyLemmaCheck out;
  out.slack = std::numeric_limits<double>::infinity();
  for_each_subset(U.bits(), [&](std::uint32_t t_bits) {
    const ItemSet t(t_bits);
    double covered = 0.0;  // sum_S lambda_S v(S \ T)
    for (const auto& [s, w] : lambda.atoms) covered += w * v.value(s - t);
    const double value = p.total(t) + covered - lambda_prices - target;
    if (value < out.slack) {
      out.slack = value;
      out.worst_t = t;
    }
  });
  return out;
}

nlohmann::json CompleteInfoPricing::to_json() const {
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    agents.push_back({{"bundle", bundles[i].items()},
                      {"q", agent_q[i]},
                      {"slack", agent_slack[i]},
                      {"lambda", agent_lambda[i].to_json()}});
  }
  return {{"prices", price_vector_to_json(prices)},
          {"alpha", alpha},
          {"welfare", welfare},
          {"agents", agents}};
}

namespace {

struct AgentPricing {
  std::vector<double> item_prices;  // aligned with the bundle's item list
  double slack = 0.0;               // exhaustively recomputed LP value
};

// Maximizes s subject to s - p(T) + sum_S lambda_S p(S) <= sum_S lambda_S v(S\T)
// for all T inside the bundle, by row generation with exhaustive separation.
AgentPricing solve_slack_lp(const GameTable& tab,
                            const std::vector<std::pair<std::uint32_t, double>>& support) {
  const int k = tab.k;
  const std::uint32_t full = (k == 0) ? 0u : ((1u << k) - 1u);
  const std::vector<double> c_t = antagonist_payoffs(tab, support);

  std::vector<double> load(k, 0.0);  // lambda marginal per compressed bit
  for (const auto& [s, w] : support) {
    for (int b = 0; b < k; ++b) {
      if ((s >> b) & 1u) load[b] += w;
    }
  }

  std::vector<std::uint32_t> t_rows;
  std::set<std::uint32_t> seen;
  auto add_row = [&](std::uint32_t t) {
    if (seen.insert(t).second) t_rows.push_back(t);
  };
  add_row(0u);
  add_row(full);

  for (int round = 0; round < kMaxRounds; ++round) {
    LpProblem lp;
    const int sv = lp.add_var(1.0, /*free_var=*/true);
    std::vector<int> pv(k);
    for (int b = 0; b < k; ++b) pv[b] = lp.add_var(0.0);
    for (std::uint32_t t : t_rows) {
      std::vector<std::pair<int, double>> coef;
      coef.emplace_back(sv, 1.0);
      for (int b = 0; b < k; ++b) {
        const double w = load[b] - (((t >> b) & 1u) ? 1.0 : 0.0);
        if (w != 0.0) coef.emplace_back(pv[b], w);
      }
      lp.add_row(Rel::le, c_t[t], std::move(coef));
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) {
      throw NumericError("price slack LP failed to solve");
    }

    std::vector<double> prices(k, 0.0);
    double lambda_prices = 0.0;
    for (int b = 0; b < k; ++b) {
      prices[b] = std::max(0.0, sol.x[pv[b]]);
      lambda_prices += load[b] * prices[b];
    }
    const std::vector<double> p_t = subset_sums(prices);
    double worst = std::numeric_limits<double>::infinity();
    std::uint32_t argmin_t = 0;
    for (std::uint32_t t = 0; t <= full; ++t) {
      const double slack_t = p_t[t] + c_t[t] - lambda_prices;
      if (slack_t < worst) {
        worst = slack_t;
        argmin_t = t;
      }
      if (full == 0) break;
    }
    if (sol.x[sv] <= worst + 1e-9 * std::max(1.0, std::abs(worst))) {
      return AgentPricing{std::move(prices), worst};
    }
    if (!seen.insert(argmin_t).second) {
      // The binding row is already present yet the LP value overshoots the
      // exhaustive minimum; accept the recomputed (honest) value.
      return AgentPricing{std::move(prices), worst};
    }
    t_rows.push_back(argmin_t);
  }
  throw NumericError("price slack LP exceeded its round budget");
}

}  // namespace

CompleteInfoPricing complete_info_prices(const std::vector<Valuation>& vals, int m) {
  if (vals.empty()) throw InputError("need at least one agent");
  for (const auto& v : vals) {
    if (v.num_items() != m) throw InputError("all valuations must cover the same items");
  }
  const Allocation opt = opt_welfare(vals, m);
  const std::vector<double> schedule = q_schedule(m);

  CompleteInfoPricing out;
  out.welfare = opt.welfare;
  out.bundles = opt.bundles;
  const int n = static_cast<int>(vals.size());
  out.agent_q.assign(n, 0.0);
  out.agent_slack.assign(n, 0.0);
  out.agent_lambda.assign(n, SetDistribution{});
  std::vector<double> prices(m, kNotForSale);

  double worst_alpha = 0.0;
  bool any_agent = false;
  for (int i = 0; i < n; ++i) {
    const ItemSet bundle = opt.bundles[i];
    const double bundle_value = vals[i].value(bundle);
    if (bundle.empty() || bundle_value <= 0.0) continue;

    GameResult best;
    bool have = false;
    for (double q : schedule) {  // descending; ">=" prefers the smaller cap on ties
      GameResult g = game_value(vals[i], bundle, q);
      if (!have || g.value >= best.value) {
        best = std::move(g);
        have = true;
      }
    }

    const GameTable tab = build_table(vals[i], bundle);
    std::vector<std::pair<std::uint32_t, double>> support;
    for (const auto& [s, w] : best.lambda_star.atoms) {
      std::uint32_t c = 0;
      for (int b = 0; b < tab.k; ++b) {
        if (s.contains(tab.items[b])) c |= 1u << b;
      }
      support.emplace_back(c, w);
    }
    AgentPricing ap = solve_slack_lp(tab, support);
    if (ap.slack <= 0.0) {
      throw NumericError("certified price slack is not positive");
    }
    for (int b = 0; b < tab.k; ++b) prices[tab.items[b]] = ap.item_prices[b];
    out.agent_q[i] = best.q;
    out.agent_slack[i] = ap.slack;
    out.agent_lambda[i] = best.lambda_star;
    worst_alpha = std::max(worst_alpha, bundle_value / ap.slack);
    any_agent = true;
  }

  out.prices = PriceVector(std::move(prices));
  out.alpha = any_agent ? worst_alpha : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace subauction
