#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "subauction/errors.hpp"
#include "subauction/itemset.hpp"
#include "subauction/prices.hpp"
#include "subauction/rng.hpp"
#include "subauction/valuation.hpp"

using namespace subauction;

namespace {

Valuation random_valuation(Rng& rng, int m) {
  switch (rng.index(4)) {
    case 0: {
      std::vector<double> w;
      for (int j = 0; j < m; ++j) w.push_back(rng.uniform(0.0, 3.0));
      return Valuation::additive(w);
    }
    case 1: {
      std::vector<double> w;
      for (int j = 0; j < m; ++j) w.push_back(rng.uniform(0.0, 3.0));
      return Valuation::unit_demand(w);
    }
    case 2: {
      std::vector<std::vector<double>> clauses;
      int nc = 1 + rng.index(3);
      for (int c = 0; c < nc; ++c) {
        std::vector<double> w;
        for (int j = 0; j < m; ++j) w.push_back(rng.uniform(0.0, 2.0));
        clauses.push_back(w);
      }
      return Valuation::xos(m, clauses);
    }
    default: {
      // Random monotone subadditive table: coverage-style construction.
      std::vector<double> weights;
      for (int j = 0; j < m; ++j) weights.push_back(rng.uniform(0.5, 2.0));
      std::vector<double> tab(std::size_t(1) << m, 0.0);
      double cap = rng.uniform(1.0, 3.0);
      for (std::uint32_t s = 1; s < tab.size(); ++s) {
        double sum = 0.0;
        for (int j = 0; j < m; ++j) {
          if ((s >> j) & 1u) sum += weights[std::size_t(j)];
        }
        tab[s] = std::min(sum, cap);
      }
      return Valuation::table(m, tab);
    }
  }
}

}  // namespace

TEST_CASE("additive value is the sum of singletons") {
  Valuation v = Valuation::additive({3.0, 1.0});
  CHECK(v.value(ItemSet(0b11u)) == doctest::Approx(4.0));
  CHECK(v.value(ItemSet()) == 0.0);
  CHECK(v.value(ItemSet::single(0)) == doctest::Approx(3.0));
}

TEST_CASE("unit demand takes the best singleton") {
  Valuation v = Valuation::unit_demand({2.0, 5.0, 1.0});
  CHECK(v.value(ItemSet::full(3)) == doctest::Approx(5.0));
  CHECK(v.value(ItemSet(0b101u)) == doctest::Approx(2.0));
  CHECK(v.value(ItemSet()) == 0.0);
}

TEST_CASE("xos takes the best clause") {
  Valuation v = Valuation::xos(2, {{1.0, 0.0}, {0.0, 2.0}});
  CHECK(v.value(ItemSet(0b11u)) == doctest::Approx(2.0));
  CHECK(v.value(ItemSet::single(0)) == doctest::Approx(1.0));
  CHECK(v.value(ItemSet::single(1)) == doctest::Approx(2.0));
}

TEST_CASE("set cover gap over three items") {
  Valuation v = Valuation::set_cover_gap(2);
  CHECK(v.num_items() == 3);
  CHECK(v.value(ItemSet::full(3)) == doctest::Approx(2.0));
  for (int j = 0; j < 3; ++j) {
    CHECK(v.value(ItemSet::single(j)) == doctest::Approx(1.0));
  }
  CHECK(v.value(ItemSet()) == 0.0);
}

TEST_CASE("scaled sums combine components linearly") {
  Valuation v = Valuation::scaled_sum(
      {{0.5, Valuation::additive({2.0, 0.0})}, {1.0, Valuation::unit_demand({0.0, 3.0})}});
  CHECK(v.value(ItemSet::single(0)) == doctest::Approx(1.0));
  CHECK(v.value(ItemSet::single(1)) == doctest::Approx(3.0));
  CHECK(v.value(ItemSet::full(2)) == doctest::Approx(4.0));
}

TEST_CASE("construction rejects bad parameters") {
  CHECK_THROWS_AS(Valuation::additive({-1.0}), InputError);
  CHECK_THROWS_AS(Valuation::additive({std::numeric_limits<double>::infinity()}), InputError);
  CHECK_THROWS_AS(Valuation::table(2, {0.0, 1.0, 1.0}), InputError);     // wrong size
  CHECK_THROWS_AS(Valuation::table(1, {0.5, 0.0}), InputError);          // not normalized
  CHECK_THROWS_AS(Valuation::table(2, {0.0, 2.0, 1.0, 1.5}), InputError);  // not monotone
}

TEST_CASE("demand picks the utility-maximizing affordable set") {
  Valuation v = Valuation::additive({3.0, 1.0});
  PriceVector p({2.0, 2.0});
  DemandResult d = v.demand(p, ItemSet::full(2));
  CHECK(d.set == ItemSet::single(0));
  CHECK(d.utility == doctest::Approx(1.0));
}

TEST_CASE("demand at zero prices takes everything") {
  Valuation v = Valuation::table(2, {0.0, 5.0, 5.0, 6.0});
  CHECK(v.is_subadditive());
  PriceVector p = PriceVector::zeros(2);
  DemandResult d = v.demand(p, ItemSet::full(2));
  CHECK(d.set == ItemSet::full(2));
  CHECK(d.value == doctest::Approx(6.0));

  // Utility ties at 4 across {0}, {1}, and the full set; higher value wins.
  DemandResult priced = v.demand(PriceVector({1.0, 1.0}), ItemSet::full(2));
  CHECK(priced.set == ItemSet::full(2));
  CHECK(priced.utility == doctest::Approx(4.0));
  CHECK(priced.value == doctest::Approx(6.0));
}

TEST_CASE("items priced at the not-for-sale sentinel are never bought") {
  Valuation v = Valuation::additive({5.0, 5.0});
  PriceVector p({kNotForSale, 0.0});
  DemandResult d = v.demand(p, ItemSet::full(2));
  CHECK(d.set == ItemSet::single(1));

  PriceVector all_out({kNotForSale, kNotForSale});
  CHECK(v.demand(all_out, ItemSet::full(2)).set.empty());
}

TEST_CASE("demand satisfies the exhaustive optimality certificate") {
  Rng rng(7ull);
  for (int trial = 0; trial < 30; ++trial) {
    int m = 2 + rng.index(4);
    Valuation v = random_valuation(rng, m);
    std::vector<double> pv;
    for (int j = 0; j < m; ++j) pv.push_back(rng.uniform(0.0, 2.0));
    PriceVector p(pv);
    ItemSet avail = ItemSet(rng.index(1 << m) | 1u);
    DemandResult d = v.demand(p, avail);
    CHECK(d.set.subset_of(avail));
    CHECK(d.utility >= -1e-12);
    for_each_subset(avail.bits(), [&](std::uint32_t s) {
      double u = v.value(ItemSet(s)) - p.total(ItemSet(s));
      CHECK(d.utility >= u - 1e-9);
    });
  }
}

TEST_CASE("monotone under inclusion for every family") {
  Rng rng(11ull);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 2 + rng.index(3);
    Valuation v = random_valuation(rng, m);
    CHECK(v.value(ItemSet()) == 0.0);
    for (std::uint32_t t = 0; t < (1u << m); ++t) {
      for_each_subset(t, [&](std::uint32_t s) {
        CHECK(v.value(ItemSet(s)) <= v.value(ItemSet(t)) + 1e-12);
      });
    }
  }
}

TEST_CASE("subadditivity checks") {
  CHECK(Valuation::additive({1.0, 2.0, 3.0}).is_subadditive());
  CHECK_FALSE(Valuation::table(2, {0.0, 1.0, 1.0, 3.0}).is_subadditive());
  CHECK(Valuation::stacked(1).is_subadditive());

  Rng rng(13ull);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2 + rng.index(4);
    std::vector<std::vector<double>> clauses;
    int nc = 1 + rng.index(4);
    for (int c = 0; c < nc; ++c) {
      std::vector<double> w;
      for (int j = 0; j < m; ++j) w.push_back(rng.uniform(0.0, 2.0));
      clauses.push_back(w);
    }
    CHECK(Valuation::xos(m, clauses).is_subadditive());
  }
}

TEST_CASE("scaled sums of subadditive parts stay subadditive") {
  Valuation v = Valuation::scaled_sum(
      {{0.5, Valuation::set_cover_gap(2)}, {0.25, Valuation::unit_demand({1.0, 2.0, 0.5})}});
  CHECK(v.is_subadditive());
}

TEST_CASE("full table matches pointwise evaluation") {
  Valuation v = Valuation::xos(3, {{1.0, 0.5, 0.0}, {0.0, 0.0, 2.0}});
  std::vector<double> tab = v.full_table();
  REQUIRE(tab.size() == 8u);
  for (std::uint32_t s = 0; s < 8u; ++s) {
    CHECK(tab[s] == doctest::Approx(v.value(ItemSet(s))));
  }
}

TEST_CASE("json round trip preserves values for every kind") {
  Rng rng(17ull);
  std::vector<Valuation> vals = {
      Valuation::additive({1.0, 2.5}),
      Valuation::unit_demand({0.5, 3.0}),
      Valuation::xos(2, {{1.0, 0.0}, {0.5, 0.5}}),
      Valuation::table(2, {0.0, 1.0, 1.0, 1.5}),
      Valuation::set_cover_gap(2),
      Valuation::stacked(1),
      Valuation::scaled_sum({{0.5, Valuation::additive({1.0, 1.0})},
                             {2.0, Valuation::unit_demand({0.0, 1.0})}}),
  };
  for (const Valuation& v : vals) {
    Valuation back = Valuation::from_json(v.to_json());
    REQUIRE(back.num_items() == v.num_items());
    for (std::uint32_t s = 0; s < (1u << v.num_items()); ++s) {
      CHECK(back.value(ItemSet(s)) == doctest::Approx(v.value(ItemSet(s))).epsilon(1e-12));
    }
  }
}

TEST_CASE("unknown kinds are rejected by the parser") {
  nlohmann::json j = {{"kind", "mystery"}, {"weights", {1.0}}};
  CHECK_THROWS_AS(Valuation::from_json(j), InputError);
}

TEST_CASE("price vector json keeps the sentinel distinct") {
  PriceVector p({1.5, kNotForSale, 0.0});
  nlohmann::json j = price_vector_to_json(p);
  CHECK(j[1].is_null());
  PriceVector back = price_vector_from_json(j);
  REQUIRE(back.size() == 3);
  CHECK(back[0] == doctest::Approx(1.5));
  CHECK(!back.finite(1));
  CHECK(back[2] == 0.0);
  CHECK_THROWS_AS(price_vector_from_json(nlohmann::json::parse("[\"x\"]")), InputError);
}

TEST_CASE("price vector validation and totals") {
  PriceVector p({1.0, 2.0});
  CHECK(p.total(ItemSet::full(2)) == doctest::Approx(3.0));
  CHECK(std::isinf(PriceVector({kNotForSale, 1.0}).total(ItemSet::full(2))));
  CHECK_THROWS_AS(PriceVector({-0.5}).validate(), InputError);
  CHECK_THROWS_AS(PriceVector({std::numeric_limits<double>::quiet_NaN()}).validate(),
                  InputError);
}
