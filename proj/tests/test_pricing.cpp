#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "subauction/errors.hpp"
#include "subauction/pricing.hpp"

using namespace subauction;

namespace {

Instance deterministic_additive(std::vector<double> w) {
  Instance inst;
  inst.m = static_cast<int>(w.size());
  inst.agents.push_back(ValuationDistribution::point_mass(Valuation::additive(std::move(w))));
  return inst;
}

Instance two_profile_additive() {
  Instance inst;
  inst.m = 3;
  inst.agents.push_back(ValuationDistribution(
      {{0.5, Valuation::additive({0.35, 0.30, 0.20})},
       {0.5, Valuation::additive({0.25, 0.30, 0.45})}}));
  return inst;
}

}  // namespace

TEST_CASE("sampling plan follows the closed form") {
  SamplingPlan plan = sample_counts(4, 1, 0.7, 0.01);
  CHECK(plan.delta == doctest::Approx(0.7 / 10.0));
  CHECK(plan.n1 == 683);
  CHECK(plan.n2 == 683);

  SamplingPlan half = sample_counts(4, 1, 0.35, 0.01);
  CHECK(half.delta == doctest::Approx(plan.delta / 2.0));
  CHECK(half.n1 >= 4 * plan.n1 - 4);
  CHECK(half.n1 <= 4 * plan.n1 + 4);

  CHECK(sample_counts(4, 1, 0.7, 0.001).n1 > plan.n1);

  CHECK_THROWS_AS(sample_counts(4, 1, 0.0, 0.01), InputError);
  CHECK_THROWS_AS(sample_counts(4, 1, 0.7, 0.0), InputError);
  CHECK_THROWS_AS(sample_counts(4, 1, 0.7, 1.0), InputError);
  CHECK_THROWS_AS(sample_counts(0, 1, 0.7, 0.01), InputError);
}

TEST_CASE("estimates collapse to exact values on deterministic instances") {
  Instance inst = deterministic_additive({1.0, 1.0});
  for (int n : {1, 3, 10}) {
    CHECK(estimate_f(inst, 0.5, n, 99ull) == doctest::Approx(exact_f(inst, 0.5)));
  }
  CHECK(estimate_f(inst, 0.0, 5, 1ull) == doctest::Approx(0.0));
  CHECK_THROWS_AS(estimate_f(inst, 1.5, 5, 1ull), InputError);
}

TEST_CASE("estimate concentrates around the exact mean") {
  Instance inst = two_profile_additive();
  double q = 0.5;
  double exact = exact_f(inst, q);
  double f0 = 0.5 * 0.85;  // additive cap-q value is q * v(M) per atom
  double f1 = 0.5 * 1.00;
  CHECK(exact == doctest::Approx(0.5 * (f0 + f1)));
  int n = 4000;
  double est = estimate_f(inst, q, n, 2024ull);
  double sigma = std::fabs(f1 - f0) / 2.0 / std::sqrt(double(n));
  CHECK(std::fabs(est - exact) <= 3.0 * sigma + 1e-12);
  CHECK(estimate_f(inst, q, n, 2024ull) == est);  // seed-stable
}

TEST_CASE("cap choice maximizes the estimated gap") {
  std::vector<double> schedule = q_schedule(16);
  std::map<double, double> f_hat = {
      {0.5, 1.0}, {0.25, 0.5}, {0.0625, 0.1}, {0.00390625, 0.0}};
  CHECK(choose_q(f_hat, schedule) == doctest::Approx(0.5));

  std::map<double, double> flat = {
      {0.5, 1.0}, {0.25, 0.75}, {0.0625, 0.5}, {0.00390625, 0.25}};
  CHECK(choose_q(flat, schedule) == doctest::Approx(0.0625));  // ties go to the smaller cap

  CHECK(choose_q({{0.5, 1.0}, {0.25, 0.2}}, {0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(choose_q({{0.5, 1.0}}, schedule), InputError);
}

TEST_CASE("deterministic two-item market prices at the chosen cap") {
  Instance inst = deterministic_additive({1.0, 1.0});
  PriceComputation out = compute_prices(inst, 0.5, 0.1, 7ull);
  CHECK(out.q == doctest::Approx(0.5));
  CHECK(out.prices[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(out.prices[1] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(out.diagnostics.max_duality_gap <= 1e-6);
  CHECK(out.diagnostics.scale == doctest::Approx(2.0));

  PriceComputation again = compute_prices(inst, 0.5, 0.1, 7ull);
  for (int j = 0; j < 2; ++j) CHECK(again.prices[j] == out.prices[j]);
}

TEST_CASE("zero valuations produce zero prices") {
  Instance inst = deterministic_additive({0.0, 0.0});
  PriceComputation out = compute_prices(inst, 0.5, 0.1, 7ull);
  CHECK(out.prices[0] == doctest::Approx(0.0));
  CHECK(out.prices[1] == doctest::Approx(0.0));
}

TEST_CASE("plan dimensions must match the instance") {
  Instance inst = deterministic_additive({1.0, 1.0});
  SamplingPlan plan = sample_counts(3, 1, 0.5, 0.1);
  CHECK_THROWS_AS(compute_prices(inst, plan), InputError);
}

TEST_CASE("exact computation agrees with sampling on deterministic instances") {
  Instance inst = deterministic_additive({1.0, 1.0, 1.0});
  ExactPriceComputation exact = compute_prices_exact(inst);
  PriceComputation sampled = compute_prices(inst, 0.5, 0.1, 11ull);
  CHECK(exact.q == doctest::Approx(sampled.q));
  for (int j = 0; j < inst.m; ++j) {
    CHECK(exact.prices[j] == doctest::Approx(sampled.prices[j]).epsilon(1e-9));
  }
  CHECK(exact.alpha == doctest::Approx(1.0 / guarantee_factor(inst.m)));
  REQUIRE(exact.lambda_by_profile.size() == 1u);
  REQUIRE(exact.lambda_by_profile[0].size() == 1u);

  // Two items sit exactly at the degenerate guarantee boundary.
  ExactPriceComputation two = compute_prices_exact(deterministic_additive({1.0, 1.0}));
  CHECK(std::isinf(two.alpha));
}

TEST_CASE("sampled prices land near exact prices on a stochastic instance") {
  Instance inst = two_profile_additive();
  ExactPriceComputation exact = compute_prices_exact(inst);
  SamplingPlan plan = sample_counts(3, 1, 0.8, 0.1);
  plan.seed = 5ull;
  PriceComputation sampled = compute_prices(inst, plan);
  CHECK(sampled.q == doctest::Approx(exact.q));
  for (int j = 0; j < inst.m; ++j) {
    CHECK(std::fabs(sampled.prices[j] - exact.prices[j]) <= 4.0 * plan.delta);
  }
}

TEST_CASE("interim caps at zero zero out the prices") {
  Instance inst = two_profile_additive();
  ExactPriceComputation out = compute_prices_exact(inst, InterimCaps::uniform(inst, 0.0));
  for (int j = 0; j < inst.m; ++j) CHECK(out.prices[j] == doctest::Approx(0.0));
}

TEST_CASE("interim-capped lambda respects the per-atom marginals") {
  Instance inst = two_profile_additive();
  InterimCaps z = InterimCaps::uniform(inst, 0.6);
  z.z[0][0][1] = 0.2;  // tighten one entry to make the check bite
  ExactPriceComputation out = compute_prices_exact(inst, z);
  std::vector<Profile> profiles = enumerate_profiles(inst);
  REQUIRE(out.lambda_by_profile.size() == profiles.size());

  int n = inst.num_agents();
  for (int i = 0; i < n; ++i) {
    const ValuationDistribution& dist = inst.agents[std::size_t(i)];
    for (int a = 0; a < dist.support_size(); ++a) {
      for (int j = 0; j < inst.m; ++j) {
        double marginal = 0.0;
        for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
          if (profiles[pi].atom[std::size_t(i)] != a) continue;
          double cond = profiles[pi].prob / dist.atom(a).p;
          marginal +=
              cond * out.lambda_by_profile[pi][std::size_t(i)].marginal(j);
        }
        CHECK(marginal <= out.q * z.z[std::size_t(i)][std::size_t(a)][std::size_t(j)] + 1e-7);
      }
    }
  }
}

TEST_CASE("per-profile lambda stays within the cap simplex") {
  Instance inst = two_profile_additive();
  ExactPriceComputation out = compute_prices_exact(inst);
  for (const auto& per_agent : out.lambda_by_profile) {
    for (const SetDistribution& lam : per_agent) {
      double mass = lam.total();
      CHECK(mass <= 1.0 + 1e-7);
      for (int j = 0; j < inst.m; ++j) CHECK(lam.marginal(j) <= out.q + 1e-7);
    }
  }
}

TEST_CASE("claim-style guarantee of the exact price construction") {
  // For prices p and per-profile cap-q optima lambda, exhaustively over T:
  //   E_v[sum_{i,S} lambda^{i,v}_S (v_i(S\T) - p(S))] + p(T)
  //     >= E[f(q)] - E[f(q^2)] - 1e-5.
  Instance inst = two_profile_additive();
  ExactPriceComputation out = compute_prices_exact(inst);
  std::vector<Profile> profiles = enumerate_profiles(inst);
  double rhs = exact_f(inst, out.q) - exact_f(inst, out.q * out.q) - 1e-5;
  for (std::uint32_t t = 0; t < (1u << inst.m); ++t) {
    ItemSet T(t);
    double lhs = out.prices.total(T);
    for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
      for (int i = 0; i < inst.num_agents(); ++i) {
        const Valuation& v = profile_valuation(inst, profiles[pi], i);
        for (const auto& [S, w] : out.lambda_by_profile[pi][std::size_t(i)].atoms) {
          lhs += profiles[pi].prob * w * (v.value(S - T) - out.prices.total(S));
        }
      }
    }
    CHECK(lhs >= rhs);
  }
}
