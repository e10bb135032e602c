#include "subauction/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <utility>

#include "subauction/errors.hpp"
#include "subauction/parallel.hpp"

namespace subauction {

namespace {

std::vector<Valuation> profile_vals(const Instance& inst, const Profile& pr) {
  std::vector<Valuation> vals;
  vals.reserve(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    vals.push_back(profile_valuation(inst, pr, i));
  }
  return vals;
}

// Copy of the instance with every support valuation multiplied by `factor`.
Instance scaled_copy(const Instance& inst, double factor) {
  Instance out = inst;
  for (auto& agent : out.agents) {
    std::vector<ValuationDistribution::Atom> atoms;
    atoms.reserve(agent.atoms().size());
    for (const auto& a : agent.atoms()) {
      atoms.push_back({a.p, Valuation::scaled_sum({{factor, a.v}})});
    }
    agent = ValuationDistribution(std::move(atoms));
  }
  return out;
}

// Schedule entries plus their squares, deduplicated, descending.
std::vector<double> estimation_points(const std::vector<double>& schedule) {
  std::set<double, std::greater<double>> pts;
  for (double q : schedule) {
    pts.insert(q);
    pts.insert(q * q);
  }
  return std::vector<double>(pts.begin(), pts.end());
}

std::vector<Valuation> sampled_profile(const Instance& inst, Rng& rng) {
  std::vector<Valuation> vals;
  vals.reserve(inst.num_agents());
  for (const auto& agent : inst.agents) {
    vals.push_back(agent.atom(agent.sample_index(rng)).v);
  }
  return vals;
}

nlohmann::json map_to_pairs(const std::map<double, double>& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [k, v] : m) arr.push_back({k, v});
  return arr;
}

}  // namespace

nlohmann::json SamplingPlan::to_json() const {
  return {{"m", m},     {"n", n},   {"epsilon", epsilon}, {"zeta", zeta},
          {"delta", delta}, {"n1", n1}, {"n2", n2},       {"seed", seed}};
}

SamplingPlan sample_counts(int m, int n, double epsilon, double zeta) {
  if (m <= 0 || n <= 0) throw InputError("m and n must be positive");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(zeta > 0.0) || !(zeta < 1.0)) throw InputError("zeta must lie in (0, 1)");
  SamplingPlan plan;
  plan.m = m;
  plan.n = n;
  plan.epsilon = epsilon;
  plan.zeta = zeta;
  plan.delta = epsilon / (m + m * n + 2);
  const double count = std::ceil(std::log(2.0 * m / zeta) / (2.0 * plan.delta * plan.delta));
  if (!(count < 2e9)) throw InputError("sample counts overflow; loosen epsilon or zeta");
  plan.n1 = static_cast<int>(count);
  plan.n2 = plan.n1;
  return plan;
}

double estimate_f(const Instance& inst, double q, int n_samples, std::uint64_t seed) {
  inst.validate();
  if (q < 0.0 || q > 1.0) throw InputError("cap q must lie in [0, 1]");
  if (n_samples <= 0) throw InputError("sample count must be positive");
  if (q == 0.0) return 0.0;
  const MarginalCaps caps = MarginalCaps::uniform(inst.m, q);
  const std::vector<double> vals = parallel_map<double>(
      static_cast<std::size_t>(n_samples), [&](std::size_t s) {
        Rng rng(substream_seed(seed, s));
        return solve_config_lp(sampled_profile(inst, rng), caps).objective;
      });
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc / n_samples;
}

double exact_f(const Instance& inst, double q) {
  inst.validate();
  if (q < 0.0 || q > 1.0) throw InputError("cap q must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  const MarginalCaps caps = MarginalCaps::uniform(inst.m, q);
  double acc = 0.0;
  for (const Profile& pr : enumerate_profiles(inst)) {
    acc += pr.prob * solve_config_lp(profile_vals(inst, pr), caps).objective;
  }
  return acc;
}

double choose_q(const std::map<double, double>& f_hat, const std::vector<double>& schedule) {
  if (schedule.empty()) throw InputError("cap schedule must be nonempty");
  auto get = [&](double q) {
    auto it = f_hat.find(q);
    if (it == f_hat.end()) {
      throw InputError("estimate map is missing an entry for q=" + std::to_string(q));
    }
    return it->second;
  };
  double best_q = 0.0;
  double best_gap = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (double q : schedule) {
    const double gap = get(q) - get(q * q);
    if (first || gap > best_gap || (gap == best_gap && q < best_q)) {
      best_q = q;
      best_gap = gap;
      first = false;
    }
  }
  return best_q;
}

nlohmann::json PriceDiagnostics::to_json() const {
  return {{"plan", plan.to_json()},
          {"scale", scale},
          {"f_hat", map_to_pairs(f_hat)},
          {"chosen_gap", chosen_gap},
          {"max_duality_gap", max_duality_gap}};
}

nlohmann::json PriceComputation::to_json() const {
  return {{"prices", price_vector_to_json(prices)},
          {"q", q},
          {"diagnostics", diagnostics.to_json()}};
}

PriceComputation compute_prices(const Instance& inst, const SamplingPlan& plan) {
  inst.validate();
  if (plan.m != inst.m || plan.n != inst.num_agents()) {
    throw InputError("sampling plan was built for a different instance shape");
  }
  if (plan.n1 <= 0 || plan.n2 <= 0 || !(plan.delta > 0.0)) {
    throw InputError("sampling plan is not initialized; build it with sample_counts");
  }

  const double bound = inst.max_value_bound();
  const bool rescale = bound > 0.0 && bound != 1.0;
  const Instance work = rescale ? scaled_copy(inst, 1.0 / bound) : inst;
  const double scale = rescale ? bound : 1.0;

  const std::vector<double> schedule = q_schedule(inst.m);
  const std::vector<double> points = estimation_points(schedule);
  std::map<double, double> f_hat;
  for (std::size_t r = 0; r < points.size(); ++r) {
    f_hat[points[r]] = estimate_f(work, points[r], plan.n1, substream_seed(plan.seed, 1, r));
  }
  const double q = choose_q(f_hat, schedule);

  struct Draw {
    std::vector<double> y;
    double gap = 0.0;
  };
  const MarginalCaps caps = MarginalCaps::uniform(inst.m, q * q);
  const std::vector<Draw> draws = parallel_map<Draw>(
      static_cast<std::size_t>(plan.n2), [&](std::size_t s) {
        Rng rng(substream_seed(plan.seed, 2, s));
        const ConfigLpSolution sol = solve_config_lp(sampled_profile(work, rng), caps);
        return Draw{sol.y, std::abs(sol.objective - sol.dual_objective)};
      });

  std::vector<double> prices(inst.m, 0.0);
  double max_gap = 0.0;
  for (const Draw& d : draws) {
    for (int j = 0; j < inst.m; ++j) prices[j] += d.y[j];
    max_gap = std::max(max_gap, d.gap);
  }
  for (int j = 0; j < inst.m; ++j) prices[j] = scale * q * prices[j] / plan.n2;

  PriceComputation out;
  out.prices = PriceVector(std::move(prices));
  out.q = q;
  out.diagnostics.plan = plan;
  out.diagnostics.scale = scale;
  for (const auto& [k, v] : f_hat) out.diagnostics.f_hat[k] = scale * v;
  out.diagnostics.chosen_gap = scale * (f_hat.at(q) - f_hat.at(q * q));
  out.diagnostics.max_duality_gap = scale * max_gap;
  return out;
}

PriceComputation compute_prices(const Instance& inst, double epsilon, double zeta,
                                std::uint64_t seed) {
  SamplingPlan plan = sample_counts(inst.m, inst.num_agents(), epsilon, zeta);
  plan.seed = seed;
  return compute_prices(inst, plan);
}

nlohmann::json ExactPriceComputation::to_json() const {
  nlohmann::json lam = nlohmann::json::array();
  for (const auto& per_agent : lambda_by_profile) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& d : per_agent) row.push_back(d.to_json());
    lam.push_back(std::move(row));
  }
  return {{"prices", price_vector_to_json(prices)},
          {"q", q},
          {"f_exact", map_to_pairs(f_exact)},
          {"alpha", alpha},
          {"lambda_by_profile", lam}};
}

ExactPriceComputation compute_prices_exact(const Instance& inst) {
  inst.validate();
  const std::vector<Profile> profiles = enumerate_profiles(inst);
  const std::vector<double> schedule = q_schedule(inst.m);

  ExactPriceComputation out;
  for (double qp : estimation_points(schedule)) {
    out.f_exact[qp] = exact_f(inst, qp);
  }
  out.q = choose_q(out.f_exact, schedule);

  const int n = inst.num_agents();
  std::vector<double> prices(inst.m, 0.0);
  out.lambda_by_profile.assign(profiles.size(), std::vector<SetDistribution>(n));
  const MarginalCaps price_caps = MarginalCaps::uniform(inst.m, out.q * out.q);
  const MarginalCaps lam_caps = MarginalCaps::uniform(inst.m, out.q);
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    const std::vector<Valuation> vals = profile_vals(inst, profiles[p]);
    const ConfigLpSolution dual_side = solve_config_lp(vals, price_caps);
    for (int j = 0; j < inst.m; ++j) {
      prices[j] += profiles[p].prob * out.q * dual_side.y[j];
    }
    const ConfigLpSolution primal_side = solve_config_lp(vals, lam_caps);
    for (const ConfigColumn& c : primal_side.columns) {
      out.lambda_by_profile[p][c.agent].atoms.emplace_back(c.set, c.weight);
    }
  }
  out.prices = PriceVector(std::move(prices));
  const double factor = guarantee_factor(inst.m);
  out.alpha = factor > 0.0 ? 1.0 / factor : std::numeric_limits<double>::infinity();
  return out;
}

ExactPriceComputation compute_prices_exact(const Instance& inst, const InterimCaps& z) {
  inst.validate();
  z.validate(inst);
  const std::vector<Profile> profiles = enumerate_profiles(inst);
  const std::vector<double> schedule = q_schedule(inst.m);
  const int n = inst.num_agents();

  // Aggregate per-profile cap weights z_j(v) = sum_i z[i][atom_i][j].
  auto cap_weights = [&](const Profile& pr) {
    std::vector<double> w(inst.m, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < inst.m; ++j) w[j] += z.z[i][pr.atom[i]][j];
    }
    return w;
  };
  auto capped = [&](const std::vector<double>& w, double s) {
    MarginalCaps caps;
    caps.q.resize(inst.m);
    for (int j = 0; j < inst.m; ++j) caps.q[j] = std::min(1.0, s * w[j]);
    return caps;
  };

  ExactPriceComputation out;
  for (double qp : estimation_points(schedule)) {
    double acc = 0.0;
    for (const Profile& pr : profiles) {
      acc += pr.prob *
             solve_config_lp(profile_vals(inst, pr), capped(cap_weights(pr), qp)).objective;
    }
    out.f_exact[qp] = acc;
  }
  out.q = choose_q(out.f_exact, schedule);

  std::vector<double> prices(inst.m, 0.0);
  for (const Profile& pr : profiles) {
    const std::vector<double> w = cap_weights(pr);
    const ConfigLpSolution sol =
        solve_config_lp(profile_vals(inst, pr), capped(w, out.q * out.q));
    for (int j = 0; j < inst.m; ++j) {
      prices[j] += pr.prob * out.q * w[j] * sol.y[j];
    }
  }
  out.prices = PriceVector(std::move(prices));

  // The lambda collection must respect the interim caps agent by agent, which
  // per-profile solutions cannot certify; the Bayesian LP enforces them.
  const BayesLpSolution bayes = solve_bayes_config_lp(inst, profiles, z, out.q);
  out.lambda_by_profile.assign(profiles.size(), std::vector<SetDistribution>(n));
  for (const BayesColumn& c : bayes.columns) {
    out.lambda_by_profile[c.profile][c.agent].atoms.emplace_back(c.set, c.weight);
  }
  const double factor = guarantee_factor(inst.m);
  out.alpha = factor > 0.0 ? 1.0 / factor : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace subauction
