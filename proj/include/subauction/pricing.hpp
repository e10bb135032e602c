#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <json.hpp>

#include "subauction/game.hpp"
#include "subauction/instance.hpp"
#include "subauction/prices.hpp"
#include "subauction/welfare_lp.hpp"

namespace subauction {

// Sample sizes for the two-phase estimation: n1 samples per estimated point
// of f, n2 samples for the price expectation. delta is the additive accuracy
// each phase targets; both counts come from Hoeffding's inequality at
// confidence zeta after rescaling values to [0, 1].
struct SamplingPlan {
  int m = 0;
  int n = 0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double delta = 0.0;
  int n1 = 0;
  int n2 = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// delta = epsilon/(m + m*n + 2), n1 = n2 = ceil(ln(2m/zeta) / (2 delta^2)).
SamplingPlan sample_counts(int m, int n, double epsilon, double zeta);

// Monte Carlo estimate of E_v[config-LP value at uniform cap q]: n_samples
// i.i.d. profiles drawn from per-sample substreams of `seed`, reduced in
// index order. Deterministic given the seed.
double estimate_f(const Instance& inst, double q, int n_samples, std::uint64_t seed);

// Exact expectation of the cap-q config-LP value over the profile support.
double exact_f(const Instance& inst, double q);

// Schedule entry maximizing f_hat(q) - f_hat(q*q); ties prefer the smaller q.
// f_hat must cover the schedule and every square of a schedule entry.
double choose_q(const std::map<double, double>& f_hat, const std::vector<double>& schedule);

struct PriceDiagnostics {
  SamplingPlan plan;
  double scale = 1.0;  // value bound used for the internal [0,1] rescale
  std::map<double, double> f_hat;  // estimates in original (unscaled) units
  double chosen_gap = 0.0;         // f_hat(q) - f_hat(q^2) at the chosen q
  double max_duality_gap = 0.0;    // worst per-sample LP duality gap observed

  nlohmann::json to_json() const;
};

struct PriceComputation {
  PriceVector prices;
  double q = 0.0;
  PriceDiagnostics diagnostics;

  nlohmann::json to_json() const;
};

// Sampled price computation: estimates f on the cap schedule and on the
// squares of its entries (each point gets its own n1-sample estimate), picks
// the gap-maximizing q, then averages q * y_j over n2 sampled profiles where
// y is the item dual of the cap-q^2 configuration LP. Values are rescaled to
// [0, 1] internally and prices unscaled on the way out.
PriceComputation compute_prices(const Instance& inst, const SamplingPlan& plan);
PriceComputation compute_prices(const Instance& inst, double epsilon, double zeta,
                                std::uint64_t seed);

struct ExactPriceComputation {
  PriceVector prices;
  double q = 0.0;
  std::map<double, double> f_exact;
  // Primal optimum of the cap-q configuration LP per profile (in
  // enumerate_profiles order), per agent. Mass may sum to less than 1; the
  // remainder sits on the empty set.
  std::vector<std::vector<SetDistribution>> lambda_by_profile;
  double alpha = 0.0;  // guarantee these prices certify: 1/guarantee_factor(m)

  nlohmann::json to_json() const;
};

// Exact finite-support variant: expectations replace sample means via full
// profile enumeration.
ExactPriceComputation compute_prices_exact(const Instance& inst);

// Interim-capped variant: per-profile item caps are min(1, q * z_j(v)) with
// z_j(v) = sum_i z[i][atom_i][j], prices are E_v[q * z_j(v) * y_j] from the
// cap-(q^2 z) duals, and the lambda collection comes from the Bayesian LP
// with interim caps q * z so its marginals respect z agent by agent.
ExactPriceComputation compute_prices_exact(const Instance& inst, const InterimCaps& z);

}  // namespace subauction
