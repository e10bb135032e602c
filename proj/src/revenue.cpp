#include "subauction/revenue.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "subauction/errors.hpp"
#include "subauction/rng.hpp"

namespace subauction {

namespace {

constexpr double kValueEps = 1e-9;  // slop for threshold comparisons on doubles

void check_beta_row(const std::vector<double>& beta, int m) {
  if (static_cast<int>(beta.size()) != m) {
    throw InputError("beta must list one threshold per item");
  }
  for (double b : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("beta entries must be finite and >= 0");
  }
}

std::vector<double> resolve_beta_row(const std::vector<double>& beta, int m) {
  if (beta.empty()) return std::vector<double>(m, 0.0);
  check_beta_row(beta, m);
  return beta;
}

std::vector<std::vector<double>> resolve_beta(const std::vector<std::vector<double>>& beta,
                                              int n, int m) {
  if (beta.empty()) {
    return std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0));
  }
  if (static_cast<int>(beta.size()) != n) {
    throw InputError("beta must list one row per agent");
  }
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (const auto& row : beta) out.push_back(resolve_beta_row(row, m));
  return out;
}

// Pr[v(j) >= t] over the support, with slop so that a threshold rebuilt from
// a support value still counts the atom that produced it.
double tail_prob(const ValuationDistribution& D, int j, double t) {
  if (std::isinf(t)) return 0.0;
  double acc = 0.0;
  for (const auto& a : D.atoms()) {
    if (a.v.value(ItemSet::single(j)) >= t - kValueEps) acc += a.p;
  }
  return acc;
}

// Shared scan: h is a nonincreasing step function of x that drops just after
// each candidate; the infimum of {x >= 0 : h(x) <= 1/2} is 0 when h(0)
// already qualifies, else the largest candidate where h still exceeds 1/2.
double cutoff_scan(const std::function<double(double)>& h, std::vector<double> candidates) {
  if (h(0.0) <= 0.5 + 1e-12) return 0.0;
  double best = 0.0;
  for (double c : candidates) {
    if (c > best && h(c) > 0.5 + 1e-12) best = c;
  }
  return best;
}

}  // namespace

double cutoff_c(const ValuationDistribution& D, const std::vector<double>& beta) {
  const int m = D.num_items();
  const std::vector<double> b = resolve_beta_row(beta, m);
  auto h = [&](double x) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += tail_prob(D, j, b[j] + x);
    return acc;
  };
  std::vector<double> candidates;
  for (const auto& a : D.atoms()) {
    for (int j = 0; j < m; ++j) {
      const double c = a.v.value(ItemSet::single(j)) - b[j];
      if (c > 0.0) candidates.push_back(c);
    }
  }
  return cutoff_scan(h, std::move(candidates));
}

double tau(const ValuationDistribution& D, const PriceVector& p, const std::vector<double>& beta) {
  const int m = D.num_items();
  if (p.size() != m) throw InputError("price vector size does not match the item count");
  const std::vector<double> b = resolve_beta_row(beta, m);
  auto h = [&](double x) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += tail_prob(D, j, std::max(b[j], p[j] + x));
    return acc;
  };
  std::vector<double> candidates;
  for (const auto& a : D.atoms()) {
    for (int j = 0; j < m; ++j) {
      if (!p.finite(j)) continue;
      const double v = a.v.value(ItemSet::single(j));
      const double c = v - p[j];
      if (c > 0.0 && v >= b[j] - kValueEps) candidates.push_back(c);
    }
  }
  return cutoff_scan(h, std::move(candidates));
}

nlohmann::json Thresholds::to_json() const {
  return {{"beta", beta}, {"c", c}, {"b", b}};
}

Thresholds make_thresholds(const Instance& inst, std::vector<std::vector<double>> beta, double b) {
  inst.validate();
  if (!(b > 0.0) || !(b < 1.0)) throw InputError("b must lie strictly inside (0, 1)");
  Thresholds t;
  t.beta = resolve_beta(beta, inst.num_agents(), inst.m);
  t.b = b;
  t.c.reserve(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    t.c.push_back(cutoff_c(inst.agents[i], t.beta[i]));
  }
  return t;
}

std::vector<std::vector<double>> zero_beta(const Instance& inst) {
  return std::vector<std::vector<double>>(inst.num_agents(), std::vector<double>(inst.m, 0.0));
}

namespace {

Valuation restrict_to(const Valuation& v, ItemSet keep) {
  const int m = v.num_items();
  std::vector<double> table(std::size_t{1} << m, 0.0);
  for (std::uint32_t s = 0; s < table.size(); ++s) {
    table[s] = v.value(ItemSet(s) & keep);
  }
  return Valuation::table(m, std::move(table));
}

}  // namespace

Valuation core_restrict(const Valuation& v, const std::vector<double>& beta, double c) {
  const int m = v.num_items();
  const std::vector<double> b = resolve_beta_row(beta, m);
  if (!(c >= 0.0)) throw InputError("cutoff c must be >= 0");
  ItemSet core;
  for (int j = 0; j < m; ++j) {
    if (v.value(ItemSet::single(j)) < b[j] + c) core = core.with(j);
  }
  return restrict_to(v, core);
}

Valuation hat_restrict(const Valuation& v, const PriceVector& p, double tau_i) {
  const int m = v.num_items();
  if (p.size() != m) throw InputError("price vector size does not match the item count");
  if (!(tau_i >= 0.0)) throw InputError("tau must be >= 0");
  ItemSet y;
  for (int j = 0; j < m; ++j) {
    if (v.value(ItemSet::single(j)) < p[j] + tau_i) y = y.with(j);
  }
  return restrict_to(v, y);
}

double surplus(const Valuation& v_hat, const PriceVector& p, ItemSet s) {
  return v_hat.demand(p, s).utility;
}

SurplusFunction make_surplus(int agent, const ValuationDistribution& D, const Valuation& realized,
                             const PriceVector& p, const std::vector<double>& beta) {
  SurplusFunction f;
  f.agent = agent;
  f.prices = p;
  f.tau = tau(D, p, beta);
  f.v_hat = hat_restrict(realized, p, f.tau);
  return f;
}

namespace {

double lower_median(std::vector<std::pair<double, double>> weighted) {
  std::sort(weighted.begin(), weighted.end());
  double cum = 0.0;
  for (const auto& [value, prob] : weighted) {
    cum += prob;
    if (cum >= 0.5 - 1e-12) return value;
  }
  return weighted.empty() ? 0.0 : weighted.back().first;
}

}  // namespace

double median_entry_fee(const ValuationDistribution& D, const PriceVector& p, ItemSet s,
                        const std::vector<double>& beta) {
  const double t = tau(D, p, beta);
  std::vector<std::pair<double, double>> mus;
  mus.reserve(D.support_size());
  for (const auto& a : D.atoms()) {
    mus.emplace_back(surplus(hat_restrict(a.v, p, t), p, s), a.p);
  }
  return lower_median(std::move(mus));
}

nlohmann::json AspeRun::to_json() const {
  nlohmann::json alloc = nlohmann::json::array();
  for (const ItemSet& s : allocation) alloc.push_back(s.items());
  return {{"allocation", alloc},
          {"utilities", utilities},
          {"fees", fees},
          {"paid", paid},
          {"surplus_seen", surplus_seen},
          {"fee_revenue", fee_revenue},
          {"item_revenue", item_revenue},
          {"revenue", revenue},
          {"welfare", welfare},
          {"sold", sold.items()},
          {"order", order}};
}

namespace {

struct AspeContext {
  std::vector<int> order;
  std::vector<std::vector<double>> beta;
  std::vector<double> taus;
  std::vector<std::vector<Valuation>> hats;  // [agent][atom]
};

AspeContext build_aspe_context(const Instance& inst, const PriceVector& p,
                               const std::vector<std::vector<double>>& beta,
                               const std::vector<int>& order) {
  inst.validate();
  if (p.size() != inst.m) throw InputError("price vector size does not match the item count");
  AspeContext ctx;
  ctx.beta = resolve_beta(beta, inst.num_agents(), inst.m);
  if (order.empty()) {
    ctx.order = inst.arrival_order();
  } else {
    std::vector<bool> seen(inst.num_agents(), false);
    if (static_cast<int>(order.size()) != inst.num_agents()) {
      throw InputError("arrival order must list every agent exactly once");
    }
    for (int i : order) {
      if (i < 0 || i >= inst.num_agents() || seen[i]) {
        throw InputError("arrival order must be a permutation of the agents");
      }
      seen[i] = true;
    }
    ctx.order = order;
  }
  for (int i = 0; i < inst.num_agents(); ++i) {
    ctx.taus.push_back(tau(inst.agents[i], p, ctx.beta[i]));
    std::vector<Valuation> hats;
    hats.reserve(inst.agents[i].support_size());
    for (const auto& a : inst.agents[i].atoms()) {
      hats.push_back(hat_restrict(a.v, p, ctx.taus[i]));
    }
    ctx.hats.push_back(std::move(hats));
  }
  return ctx;
}

double context_fee(const AspeContext& ctx, const Instance& inst, int i, const PriceVector& p,
                   ItemSet remaining) {
  std::vector<std::pair<double, double>> mus;
  const auto& atoms = inst.agents[i].atoms();
  mus.reserve(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    mus.emplace_back(surplus(ctx.hats[i][a], p, remaining), atoms[a].p);
  }
  return lower_median(std::move(mus));
}

AspeRun run_aspe_with_context(const AspeContext& ctx, const Instance& inst, const PriceVector& p,
                              const std::vector<int>& atoms) {
  const int n = inst.num_agents();
  if (static_cast<int>(atoms.size()) != n) {
    throw InputError("profile must pick one support atom per agent");
  }
  AspeRun run;
  run.order = ctx.order;
  run.allocation.assign(n, ItemSet());
  run.utilities.assign(n, 0.0);
  run.fees.assign(n, 0.0);
  run.paid.assign(n, false);
  run.surplus_seen.assign(n, 0.0);

  ItemSet remaining = ItemSet::full(inst.m);
  for (int i : ctx.order) {
    const int a = atoms[i];
    if (a < 0 || a >= inst.agents[i].support_size()) {
      throw InputError("profile atom index out of range");
    }
    const double fee = context_fee(ctx, inst, i, p, remaining);
    const double mu = surplus(ctx.hats[i][a], p, remaining);
    run.fees[i] = fee;
    run.surplus_seen[i] = mu;
    if (mu < fee) continue;
    run.paid[i] = true;
    run.fee_revenue += fee;
    const DemandResult d = ctx.hats[i][a].demand(p, remaining);
    run.allocation[i] = d.set;
    const double payments = p.total(d.set);
    run.item_revenue += payments;
    const double true_value = inst.agents[i].atom(a).v.value(d.set);
    run.utilities[i] = true_value - payments - fee;
    run.welfare += true_value;
    run.sold = run.sold | d.set;
    remaining = remaining - d.set;
  }
  run.revenue = run.fee_revenue + run.item_revenue;
  return run;
}

}  // namespace

AspeRun run_aspe(const Instance& inst, const PriceVector& p,
                 const std::vector<std::vector<double>>& beta, const std::vector<int>& order,
                 const std::vector<int>& atoms) {
  const AspeContext ctx = build_aspe_context(inst, p, beta, order);
  return run_aspe_with_context(ctx, inst, p, atoms);
}

AspeRun run_aspe_sampled(const Instance& inst, const PriceVector& p,
                         const std::vector<std::vector<double>>& beta,
                         const std::vector<int>& order, std::uint64_t seed) {
  const AspeContext ctx = build_aspe_context(inst, p, beta, order);
  Rng rng(seed);
  std::vector<int> atoms(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) atoms[i] = inst.agents[i].sample_index(rng);
  return run_aspe_with_context(ctx, inst, p, atoms);
}

nlohmann::json AspeSummary::to_json() const {
  return {{"expected_fee_revenue", expected_fee_revenue},
          {"expected_item_revenue", expected_item_revenue},
          {"expected_revenue", expected_revenue},
          {"expected_welfare", expected_welfare},
          {"expected_surplus", expected_surplus},
          {"taus", taus}};
}

AspeSummary run_aspe_exact(const Instance& inst, const PriceVector& p,
                           const std::vector<std::vector<double>>& beta,
                           const std::vector<int>& order) {
  const AspeContext ctx = build_aspe_context(inst, p, beta, order);
  AspeSummary sum;
  sum.expected_surplus.assign(inst.num_agents(), 0.0);
  sum.taus = ctx.taus;
  for (const Profile& pr : enumerate_profiles(inst)) {
    const AspeRun run = run_aspe_with_context(ctx, inst, p, pr.atom);
    sum.expected_fee_revenue += pr.prob * run.fee_revenue;
    sum.expected_item_revenue += pr.prob * run.item_revenue;
    sum.expected_revenue += pr.prob * run.revenue;
    sum.expected_welfare += pr.prob * run.welfare;
    for (int i = 0; i < inst.num_agents(); ++i) {
      sum.expected_surplus[i] += pr.prob * run.surplus_seen[i];
    }
  }
  return sum;
}

nlohmann::json EntryFeeBound::to_json() const {
  return {{"fee_revenue", fee_revenue},
          {"surplus_total", surplus_total},
          {"tau_total", tau_total},
          {"slack", slack}};
}

EntryFeeBound entry_fee_bound_check(const Instance& inst, const PriceVector& p,
                                    const std::vector<int>& order,
                                    const std::vector<std::vector<double>>& beta) {
  const AspeSummary sum = run_aspe_exact(inst, p, beta, order);
  EntryFeeBound out;
  out.fee_revenue = sum.expected_fee_revenue;
  for (double s : sum.expected_surplus) out.surplus_total += s;
  for (double t : sum.taus) out.tau_total += t;
  out.slack = out.fee_revenue - out.surplus_total / 4.0 + 5.0 * out.tau_total / 8.0;
  return out;
}

MechanismRun run_rspm(const std::vector<Valuation>& vals,
                      const std::vector<std::vector<double>>& prices,
                      const std::vector<int>& order) {
  const int n = static_cast<int>(vals.size());
  if (n == 0) throw InputError("need at least one agent");
  const int m = vals[0].num_items();
  for (const Valuation& v : vals) {
    if (v.num_items() != m) throw InputError("all valuations must cover the same items");
  }
  if (static_cast<int>(prices.size()) != n) {
    throw InputError("personalized prices must list one row per agent");
  }
  for (const auto& row : prices) {
    if (static_cast<int>(row.size()) != m) {
      throw InputError("personalized prices must list one entry per item");
    }
    for (double x : row) {
      if (std::isnan(x) || x < 0.0) throw InputError("prices must be >= 0");
    }
  }
  {
    std::vector<bool> seen(n, false);
    if (static_cast<int>(order.size()) != n) {
      throw InputError("arrival order must list every agent exactly once");
    }
    for (int i : order) {
      if (i < 0 || i >= n || seen[i]) {
        throw InputError("arrival order must be a permutation of the agents");
      }
      seen[i] = true;
    }
  }

  MechanismRun run;
  run.order = order;
  run.allocation.assign(n, ItemSet());
  run.utilities.assign(n, 0.0);
  ItemSet remaining = ItemSet::full(m);
  for (int i : order) {
    int best = -1;
    double best_u = 0.0;
    double best_v = 0.0;
    for (int j = 0; j < m; ++j) {
      if (!remaining.contains(j) || std::isinf(prices[i][j])) continue;
      const double v = vals[i].value(ItemSet::single(j));
      const double u = v - prices[i][j];
      if (u <= 0.0) continue;  // only strictly profitable purchases
      if (best < 0 || u > best_u || (u == best_u && v > best_v)) {
        best = j;
        best_u = u;
        best_v = v;
      }
    }
    if (best < 0) continue;
    run.allocation[i] = ItemSet::single(best);
    run.utilities[i] = best_u;
    run.revenue += prices[i][best];
    run.welfare += best_v;
    run.sold = run.sold.with(best);
    remaining = remaining.without(best);
  }
  return run;
}

double expected_rspm_revenue(const Instance& inst, const std::vector<std::vector<double>>& prices,
                             const std::vector<int>& order) {
  inst.validate();
  const std::vector<int> ord = order.empty() ? inst.arrival_order() : order;
  double acc = 0.0;
  for (const Profile& pr : enumerate_profiles(inst)) {
    std::vector<Valuation> vals;
    vals.reserve(inst.num_agents());
    for (int i = 0; i < inst.num_agents(); ++i) vals.push_back(profile_valuation(inst, pr, i));
    acc += pr.prob * run_rspm(vals, prices, ord).revenue;
  }
  return acc;
}

void InterimAllocation::validate(const Instance& inst) const {
  if (static_cast<int>(sigma.size()) != inst.num_agents()) {
    throw InputError("sigma must list one block per agent");
  }
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (static_cast<int>(sigma[i].size()) != inst.agents[i].support_size()) {
      throw InputError("sigma must list one distribution per support atom");
    }
    for (const auto& dist : sigma[i]) {
      double total = 0.0;
      for (const auto& [s, prob] : dist) {
        ItemSet::checked(s.bits(), inst.m);
        if (!(prob >= 0.0)) throw InputError("sigma probabilities must be >= 0");
        total += prob;
      }
      if (total > 1.0 + 1e-9) throw InputError("sigma probabilities must sum to at most 1");
    }
  }
}

double InterimAllocation::pi(int i, int a, int j) const {
  double acc = 0.0;
  for (const auto& [s, prob] : sigma[i][a]) {
    if (s.contains(j)) acc += prob;
  }
  return acc;
}

InterimCaps InterimAllocation::to_caps(const Instance& inst) const {
  validate(inst);
  InterimCaps caps;
  caps.z.resize(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    caps.z[i].resize(inst.agents[i].support_size());
    for (int a = 0; a < inst.agents[i].support_size(); ++a) {
      caps.z[i][a].resize(inst.m);
      for (int j = 0; j < inst.m; ++j) {
        caps.z[i][a][j] = std::min(1.0, pi(i, a, j));
      }
    }
  }
  return caps;
}

nlohmann::json InterimAllocation::to_json() const {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& per_atom : sigma) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& dist : per_atom) {
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& [s, prob] : dist) {
        entries.push_back({{"set", s.items()}, {"p", prob}});
      }
      atoms.push_back(std::move(entries));
    }
    agents.push_back(std::move(atoms));
  }
  return {{"sigma", agents}};
}

InterimAllocation InterimAllocation::from_json(const nlohmann::json& j, const Instance& inst) {
  InterimAllocation out;
  try {
    const nlohmann::json& agents = j.at("sigma");
    for (const auto& per_atom : agents) {
      std::vector<std::vector<std::pair<ItemSet, double>>> atom_dists;
      for (const auto& dist : per_atom) {
        std::vector<std::pair<ItemSet, double>> entries;
        for (const auto& e : dist) {
          std::uint32_t bits = 0;
          for (int id : e.at("set").get<std::vector<int>>()) {
            if (id < 0 || id >= inst.m) throw InputError("sigma set has an item out of range");
            bits |= 1u << id;
          }
          entries.emplace_back(ItemSet(bits), e.at("p").get<double>());
        }
        atom_dists.push_back(std::move(entries));
      }
      out.sigma.push_back(std::move(atom_dists));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad interim allocation JSON: ") + e.what());
  }
  out.validate(inst);
  return out;
}

double tradeoff_constant(double b) {
  if (!(b > 0.0) || !(b < 1.0)) throw InputError("b must lie strictly inside (0, 1)");
  return 0.25 * ((2.0 * b * (1.0 - b)) / (8.0 * b - 2.0 * b * b + 1.0));
}

IndependenceReport check_item_independence(const Instance& inst, double tol) {
  inst.validate();
  IndependenceReport rep;
  for (int i = 0; i < inst.num_agents(); ++i) {
    const auto& atoms = inst.agents[i].atoms();
    for (int j = 0; j < inst.m; ++j) {
      for (int k = j + 1; k < inst.m; ++k) {
        std::map<std::pair<double, double>, double> joint;
        std::map<double, double> pj, pk;
        for (const auto& a : atoms) {
          const double vj = a.v.value(ItemSet::single(j));
          const double vk = a.v.value(ItemSet::single(k));
          joint[{vj, vk}] += a.p;
          pj[vj] += a.p;
          pk[vk] += a.p;
        }
        bool ok = true;
        for (const auto& [valj, probj] : pj) {
          for (const auto& [valk, probk] : pk) {
            const auto it = joint.find({valj, valk});
            const double got = it == joint.end() ? 0.0 : it->second;
            if (std::abs(got - probj * probk) > tol) ok = false;
          }
        }
        if (!ok) {
          rep.independent = false;
          rep.warnings.push_back("agent " + std::to_string(i) + ": singleton values of items " +
                                 std::to_string(j) + " and " + std::to_string(k) +
                                 " are correlated");
        }
      }
    }
  }
  return rep;
}

}  // namespace subauction
