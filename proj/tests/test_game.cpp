#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "subauction/errors.hpp"
#include "subauction/game.hpp"
#include "subauction/instance.hpp"
#include "subauction/welfare_lp.hpp"

using namespace subauction;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Valuation random_subadditive(Rng& rng, int m) {
  Instance inst = generate_instance(rng.uniform() < 0.5 ? "xos-random" : "table-random-subadditive",
                                    m, 1, 1, rng.next_u64());
  return inst.agents[0].atom(0).v;
}

}  // namespace

TEST_CASE("payoff sums over atom pairs") {
  Valuation v = Valuation::additive({1.0, 1.0});
  ItemSet U = ItemSet::full(2);
  SetDistribution on_u = SetDistribution::point_mass(U);
  SetDistribution on_empty = SetDistribution::point_mass(ItemSet());
  CHECK(payoff(v, on_u, on_empty) == doctest::Approx(2.0));
  CHECK(payoff(v, on_u, on_u) == doctest::Approx(0.0));

  double q = 0.3;
  SetDistribution mix{{{U, q}, {ItemSet(), 1.0 - q}}};
  CHECK(mix.in_simplex(q, U));
  CHECK(payoff(v, mix, mix) == doctest::Approx(2.0 * q * (1.0 - q)));
}

TEST_CASE("set distribution marginals and simplex membership") {
  SetDistribution d{{{ItemSet(0b01u), 0.25}, {ItemSet(0b11u), 0.25}, {ItemSet(), 0.5}}};
  CHECK(d.total() == doctest::Approx(1.0));
  CHECK(d.marginal(0) == doctest::Approx(0.5));
  CHECK(d.marginal(1) == doctest::Approx(0.25));
  CHECK(d.in_simplex(0.5, ItemSet::full(2)));
  CHECK_FALSE(d.in_simplex(0.4, ItemSet::full(2)));
  SetDistribution leaky{{{ItemSet(), 0.7}}};
  CHECK_FALSE(leaky.in_simplex(1.0, ItemSet::full(2)));
}

TEST_CASE("game value at cap zero is zero") {
  Valuation v = Valuation::additive({1.0, 1.0});
  GameResult g = game_value(v, ItemSet::full(2), 0.0);
  CHECK(g.value == doctest::Approx(0.0));
}

TEST_CASE("two identical additive items at cap one half") {
  Valuation v = Valuation::additive({1.0, 1.0});
  ItemSet U = ItemSet::full(2);
  GameResult g = game_value(v, U, 0.5);
  CHECK(g.value == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(g.lambda_star.in_simplex(0.5, U));
  CHECK(g.mu_star.in_simplex(0.5, U));
  // Saddle point: the returned pair realizes the value.
  CHECK(payoff(v, g.lambda_star, g.mu_star) == doctest::Approx(g.value).epsilon(1e-6));
}

TEST_CASE("game value never exceeds the cap-q welfare bound") {
  Rng rng(31ull);
  for (int trial = 0; trial < 8; ++trial) {
    int m = 2 + rng.index(3);
    Valuation v = random_subadditive(rng, m);
    for (double q : {0.25, 0.5}) {
      GameResult g = game_value(v, ItemSet::full(m), q);
      CHECK(g.value >= -1e-9);
      CHECK(g.value <= f_value(v, q) + 1e-7);
      CHECK(g.lambda_star.in_simplex(q, ItemSet::full(m)));
      CHECK(g.mu_star.in_simplex(q, ItemSet::full(m)));
    }
  }
}

TEST_CASE("telescoping lower bound on the game value") {
  Rng rng(47ull);
  for (int trial = 0; trial < 6; ++trial) {
    int m = 4;
    Valuation v = random_subadditive(rng, m);
    for (double q : q_schedule(m)) {
      double g = game_value(v, ItemSet::full(m), q).value;
      double gap = f_value(v, q) - f_value(v, q * q);
      CHECK(g >= gap - 1e-6);
    }
  }
}

TEST_CASE("cap schedules follow the doubling pattern") {
  CHECK(q_schedule(16) == std::vector<double>{0.5, 0.25, 0.0625});
  CHECK(q_schedule(4) == std::vector<double>{0.5, 0.25});
  CHECK(q_schedule(3) == std::vector<double>{0.5, 0.25});
  CHECK(q_schedule(2) == std::vector<double>{0.5});
  CHECK(q_schedule(1) == std::vector<double>{0.5});
  CHECK(q_schedule(17).size() == 4u);
  for (int m : {3, 4, 5, 8, 16, 20}) {
    std::vector<double> sched = q_schedule(m);
    CHECK(schedule_length(m) == static_cast<int>(sched.size()));
    double last = sched.back();
    CHECK(last * last <= 2.0 / (double(m) * double(m)) + 1e-15);
  }
  CHECK(guarantee_factor(16) == doctest::Approx((0.5 - 1.0 / 16.0) / 3.0));
}

TEST_CASE("key lemma slack for a point mass with no prices") {
  Valuation v = Valuation::unit_demand({2.0, 1.0});
  ItemSet U = ItemSet::full(2);
  SetDistribution lambda = SetDistribution::point_mass(U);
  KeyLemmaCheck chk = verify_key_lemma(v, U, PriceVector::zeros(2), lambda, kInf);
  CHECK(chk.slack == doctest::Approx(0.0));
  CHECK(chk.worst_t == U);

  // With any lambda and zero prices, every term is nonnegative.
  SetDistribution mix{{{ItemSet(0b01u), 0.5}, {ItemSet(0b10u), 0.5}}};
  CHECK(verify_key_lemma(v, U, PriceVector::zeros(2), mix, kInf).slack >= -1e-12);
}

TEST_CASE("complete information prices for two symmetric items") {
  std::vector<Valuation> vals = {Valuation::additive({1.0, 1.0})};
  CompleteInfoPricing cip = complete_info_prices(vals, 2);
  CHECK(cip.welfare == doctest::Approx(2.0));
  REQUIRE(cip.bundles.size() == 1u);
  CHECK(cip.bundles[0] == ItemSet::full(2));
  CHECK(cip.agent_slack[0] >= 0.0);
  CHECK(cip.alpha >= 1.0);
  CHECK(std::isfinite(cip.alpha));
  KeyLemmaCheck chk =
      verify_key_lemma(vals[0], cip.bundles[0], cip.prices, cip.agent_lambda[0], cip.alpha);
  CHECK(chk.slack >= -1e-7);
}

TEST_CASE("items in zero-value bundles are not for sale") {
  // A single agent's bundle is the full set, so the worthless item rides
  // along at a harmless finite price.
  CompleteInfoPricing solo = complete_info_prices({Valuation::additive({1.0, 0.0})}, 2);
  CHECK(std::isfinite(solo.prices[0]));
  CHECK(std::isfinite(solo.prices[1]));

  // With a second agent the partition hands the worthless item to a
  // zero-value bundle, which is skipped and never priced.
  std::vector<Valuation> vals = {Valuation::additive({1.0, 0.0}),
                                 Valuation::additive({0.0, 0.0})};
  CompleteInfoPricing cip = complete_info_prices(vals, 2);
  CHECK(std::isfinite(cip.prices[0]));
  CHECK(cip.prices.finite(1) == false);
  CHECK(cip.agent_q[1] == doctest::Approx(0.0));

  // All-zero profiles put everything off the market and certify nothing.
  CompleteInfoPricing zero = complete_info_prices({Valuation::additive({0.0, 0.0})}, 2);
  CHECK(zero.prices.finite(0) == false);
  CHECK(zero.prices.finite(1) == false);
  CHECK(std::isinf(zero.alpha));
}

TEST_CASE("complete information prices certify the key lemma on random profiles") {
  Rng rng(83ull);
  for (int trial = 0; trial < 6; ++trial) {
    int m = 3 + rng.index(2);
    int n = 1 + rng.index(2);
    std::vector<Valuation> vals;
    for (int i = 0; i < n; ++i) vals.push_back(random_subadditive(rng, m));
    CompleteInfoPricing cip = complete_info_prices(vals, m);
    for (int i = 0; i < n; ++i) {
      if (cip.bundles[std::size_t(i)].empty()) continue;
      KeyLemmaCheck chk = verify_key_lemma(vals[std::size_t(i)], cip.bundles[std::size_t(i)],
                                           cip.prices, cip.agent_lambda[std::size_t(i)],
                                           cip.alpha);
      CHECK(chk.slack >= -1e-7);
    }
  }
}

TEST_CASE("oversized universes are refused") {
  Valuation v = Valuation::additive(std::vector<double>(17, 1.0));
  CHECK_THROWS_AS(game_value(v, ItemSet::full(17), 0.5), CapabilityError);
}
