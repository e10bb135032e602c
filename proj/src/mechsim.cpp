#include "subauction/mechsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "subauction/errors.hpp"
#include "subauction/parallel.hpp"
#include "subauction/welfare_lp.hpp"

namespace subauction {

namespace {

void check_order(const std::vector<int>& order, int n) {
  if (static_cast<int>(order.size()) != n) {
    throw InputError("arrival order must list every agent exactly once");
  }
  std::vector<bool> seen(n, false);
  for (int i : order) {
    if (i < 0 || i >= n || seen[i]) {
      throw InputError("arrival order must be a permutation of the agents");
    }
    seen[i] = true;
  }
}

std::vector<int> resolve_order(const Instance& inst, const std::vector<int>& order) {
  if (order.empty()) return inst.arrival_order();
  check_order(order, inst.num_agents());
  return order;
}

std::vector<Valuation> profile_vals(const Instance& inst, const Profile& pr) {
  std::vector<Valuation> vals;
  vals.reserve(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    vals.push_back(profile_valuation(inst, pr, i));
  }
  return vals;
}

std::vector<int> sampled_atoms(const Instance& inst, Rng& rng) {
  std::vector<int> atom(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    atom[i] = inst.agents[i].sample_index(rng);
  }
  return atom;
}

std::vector<Valuation> atoms_to_vals(const Instance& inst, const std::vector<int>& atom) {
  std::vector<Valuation> vals;
  vals.reserve(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    vals.push_back(inst.agents[i].atom(atom[i]).v);
  }
  return vals;
}

}  // namespace

nlohmann::json MechanismRun::to_json() const {
  nlohmann::json alloc = nlohmann::json::array();
  for (const ItemSet& s : allocation) alloc.push_back(s.items());
  return {{"allocation", alloc}, {"utilities", utilities}, {"revenue", revenue},
          {"welfare", welfare}, {"sold", sold.items()},    {"order", order}};
}

MechanismRun run_posted_price(const std::vector<Valuation>& vals, const PriceVector& p,
                              const std::vector<int>& order) {
  const int n = static_cast<int>(vals.size());
  if (n == 0) throw InputError("need at least one agent");
  const int m = vals[0].num_items();
  for (const Valuation& v : vals) {
    if (v.num_items() != m) throw InputError("all valuations must cover the same items");
  }
  if (p.size() != m) throw InputError("price vector size does not match the item count");
  check_order(order, n);

  MechanismRun run;
  run.order = order;
  run.allocation.assign(n, ItemSet());
  run.utilities.assign(n, 0.0);
  ItemSet remaining = ItemSet::full(m);
  for (int i : order) {
    const DemandResult d = vals[i].demand(p, remaining);
    run.allocation[i] = d.set;
    run.utilities[i] = d.utility;
    run.revenue += p.total(d.set);
    run.welfare += d.value;
    run.sold = run.sold | d.set;
    remaining = remaining - d.set;
  }
  return run;
}

double expected_welfare_exact(const Instance& inst, const PriceVector& p,
                              const std::vector<int>& order) {
  inst.validate();
  const std::vector<int> ord = resolve_order(inst, order);
  double acc = 0.0;
  for (const Profile& pr : enumerate_profiles(inst)) {
    acc += pr.prob * run_posted_price(profile_vals(inst, pr), p, ord).welfare;
  }
  return acc;
}

double expected_welfare_mc(const Instance& inst, const PriceVector& p,
                           const std::vector<int>& order, int n_samples, std::uint64_t seed) {
  inst.validate();
  if (n_samples <= 0) throw InputError("sample count must be positive");
  const std::vector<int> ord = resolve_order(inst, order);
  const std::vector<double> vals = parallel_map<double>(
      static_cast<std::size_t>(n_samples), [&](std::size_t s) {
        Rng rng(substream_seed(seed, s));
        std::vector<int> atom = sampled_atoms(inst, rng);
        return run_posted_price(atoms_to_vals(inst, atom), p, ord).welfare;
      });
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc / n_samples;
}

double expected_opt_welfare_exact(const Instance& inst) {
  inst.validate();
  double acc = 0.0;
  for (const Profile& pr : enumerate_profiles(inst)) {
    acc += pr.prob * opt_welfare(profile_vals(inst, pr), inst.m).welfare;
  }
  return acc;
}

namespace {

// Samples n atom vectors, solves the allocation DP once per distinct
// profile, and averages in sample order.
double mc_opt_mean(const Instance& inst, int n_samples, std::uint64_t seed) {
  std::vector<std::vector<int>> atom(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(s)));
    atom[s] = sampled_atoms(inst, rng);
  }
  std::map<std::vector<int>, double> cache;
  for (const auto& a : atom) cache.emplace(a, 0.0);
  std::vector<const std::vector<int>*> keys;
  keys.reserve(cache.size());
  for (const auto& [k, v] : cache) keys.push_back(&k);
  const std::vector<double> solved = parallel_map<double>(keys.size(), [&](std::size_t i) {
    return opt_welfare(atoms_to_vals(inst, *keys[i]), inst.m).welfare;
  });
  for (std::size_t i = 0; i < keys.size(); ++i) cache[*keys[i]] = solved[i];
  double acc = 0.0;
  for (const auto& a : atom) acc += cache[a];
  return acc / n_samples;
}

}  // namespace

double expected_opt_welfare_mc(const Instance& inst, int n_samples, std::uint64_t seed) {
  inst.validate();
  if (n_samples <= 0) throw InputError("sample count must be positive");
  return mc_opt_mean(inst, n_samples, seed);
}

double competitive_ratio_exact(const Instance& inst, const PriceVector& p,
                               const std::vector<int>& order) {
  const double alg = expected_welfare_exact(inst, p, order);
  const double opt = expected_opt_welfare_exact(inst);
  if (alg <= 0.0) return std::numeric_limits<double>::infinity();
  return opt / alg;
}

double competitive_ratio_mc(const Instance& inst, const PriceVector& p,
                            const std::vector<int>& order, int n_samples, std::uint64_t seed) {
  // Paired estimate: the same sampled profiles feed both expectations.
  const double alg = expected_welfare_mc(inst, p, order, n_samples, seed);
  const double opt = expected_opt_welfare_mc(inst, n_samples, seed);
  if (alg <= 0.0) return std::numeric_limits<double>::infinity();
  return opt / alg;
}

nlohmann::json UtilityBoundReport::to_json() const {
  return {{"expected_utilities", expected_utilities},
          {"hallucinated", hallucinated},
          {"guarantee", guarantee},
          {"hallucination_slack", hallucination_slack},
          {"key_slack", key_slack},
          {"slack", slack},
          {"expected_opt", expected_opt},
          {"expected_sold_prices", expected_sold_prices}};
}

UtilityBoundReport verify_utility_bound(const Instance& inst, const PriceVector& p,
                                        const std::vector<std::vector<SetDistribution>>& lambdas,
                                        double alpha, const std::vector<int>& order) {
  inst.validate();
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  const std::vector<int> ord = resolve_order(inst, order);
  const std::vector<Profile> profiles = enumerate_profiles(inst);
  const int n = inst.num_agents();
  if (lambdas.size() != profiles.size()) {
    throw InputError("lambda collection does not match the profile enumeration");
  }
  for (const auto& per_agent : lambdas) {
    if (static_cast<int>(per_agent.size()) != n) {
      throw InputError("lambda collection does not cover every agent");
    }
  }

  UtilityBoundReport rep;
  std::vector<ItemSet> sold(profiles.size());
  for (std::size_t v = 0; v < profiles.size(); ++v) {
    const MechanismRun run = run_posted_price(profile_vals(inst, profiles[v]), p, ord);
    sold[v] = run.sold;
    double u = 0.0;
    for (double x : run.utilities) u += x;
    rep.expected_utilities += profiles[v].prob * u;
    rep.expected_sold_prices += profiles[v].prob * p.total(run.sold);
  }

  for (std::size_t v = 0; v < profiles.size(); ++v) {
    double inner = 0.0;  // sum over v' of Pr(v') sum_{i,S} lambda (v_i(S\T) - p(S))
    for (std::size_t w = 0; w < profiles.size(); ++w) {
      const ItemSet t = sold[w];
      double term = 0.0;
      for (int i = 0; i < n; ++i) {
        const Valuation& vi = profile_valuation(inst, profiles[v], i);
        for (const auto& [s, weight] : lambdas[v][i].atoms) {
          term += weight * (vi.value(s - t) - p.total(s));
        }
      }
      inner += profiles[w].prob * term;
    }
    rep.hallucinated += profiles[v].prob * inner;
  }

  rep.expected_opt = expected_opt_welfare_exact(inst);
  const double opt_share = std::isinf(alpha) ? 0.0 : rep.expected_opt / alpha;
  rep.guarantee = opt_share - rep.expected_sold_prices;
  rep.hallucination_slack = rep.expected_utilities - rep.hallucinated;
  rep.key_slack = rep.hallucinated - rep.guarantee;
  rep.slack = rep.expected_utilities - rep.guarantee;
  return rep;
}

}  // namespace subauction
