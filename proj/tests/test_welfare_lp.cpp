#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "subauction/errors.hpp"
#include "subauction/instance.hpp"
#include "subauction/welfare_lp.hpp"

using namespace subauction;

namespace {

void check_solution_invariants(const std::vector<Valuation>& vals, const MarginalCaps& caps,
                               const ConfigLpSolution& sol) {
  int m = caps.size();
  int n = static_cast<int>(vals.size());
  CHECK(std::fabs(sol.objective - sol.dual_objective) <= 1e-6 * (1.0 + std::fabs(sol.objective)));
  std::vector<double> agent_mass(std::size_t(n), 0.0);
  std::vector<double> item_mass(std::size_t(m), 0.0);
  for (const ConfigColumn& c : sol.columns) {
    CHECK(c.weight > 0.0);
    agent_mass[std::size_t(c.agent)] += c.weight;
    for (int j : c.set.items()) item_mass[std::size_t(j)] += c.weight;
  }
  for (int i = 0; i < n; ++i) CHECK(agent_mass[std::size_t(i)] <= 1.0 + 1e-7);
  for (int j = 0; j < m; ++j) CHECK(item_mass[std::size_t(j)] <= caps.q[std::size_t(j)] + 1e-7);
  for (double yj : sol.y) CHECK(yj >= -1e-9);
  for (double ui : sol.u) CHECK(ui >= -1e-9);
  CHECK_FALSE(dual_separation(vals, sol.y, sol.u, 1e-6).has_value());
}

}  // namespace

TEST_CASE("single additive agent under a uniform cap") {
  std::vector<Valuation> vals = {Valuation::additive({1.0, 1.0})};
  for (double q : {0.1, 0.3, 0.5, 1.0}) {
    ConfigLpSolution sol = solve_config_lp(vals, MarginalCaps::uniform(2, q));
    CHECK(sol.objective == doctest::Approx(2.0 * q).epsilon(1e-8));
    check_solution_invariants(vals, MarginalCaps::uniform(2, q), sol);
  }
  CHECK(f_value(vals[0], 0.3) == doctest::Approx(0.6));
  CHECK(f_value(vals[0], 0.0) == doctest::Approx(0.0));
  CHECK(f_value(vals[0], 1.0) == doctest::Approx(2.0));
}

TEST_CASE("cap one recovers the full value, cap zero nothing") {
  Valuation v = Valuation::xos(3, {{1.0, 0.5, 0.0}, {0.0, 0.0, 2.0}});
  CHECK(f_value(v, 1.0) == doctest::Approx(v.value(ItemSet::full(3))));
  CHECK(f_value(v, 0.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(f_value(v, 1.5), InputError);
  CHECK_THROWS_AS(f_value(v, -0.1), InputError);
}

TEST_CASE("dual separation finds the most violated demand set") {
  std::vector<Valuation> vals = {Valuation::additive({3.0, 1.0})};
  auto hit = dual_separation(vals, {0.0, 0.0}, {0.0});
  REQUIRE(hit.has_value());
  CHECK(hit->agent == 0);
  CHECK(hit->set == ItemSet::full(2));
  CHECK(hit->violation == doctest::Approx(4.0));

  auto partial = dual_separation(vals, {2.0, 2.0}, {0.0});
  REQUIRE(partial.has_value());
  CHECK(partial->set == ItemSet::single(0));
  CHECK(partial->violation == doctest::Approx(1.0));

  ConfigLpSolution sol = solve_config_lp(vals, MarginalCaps::uniform(2, 0.5));
  CHECK_FALSE(dual_separation(vals, sol.y, sol.u, 1e-6).has_value());
}

TEST_CASE("exact optimum over partitions") {
  Allocation a = opt_welfare({Valuation::additive({2.0, 0.0}), Valuation::additive({0.0, 3.0})}, 2);
  CHECK(a.welfare == doctest::Approx(5.0));
  REQUIRE(a.bundles.size() == 2u);
  CHECK(a.bundles[0] == ItemSet::single(0));
  CHECK(a.bundles[1] == ItemSet::single(1));

  Valuation t = Valuation::table(2, {0.0, 2.0, 2.0, 3.0});
  CHECK(opt_welfare({t, t}, 2).welfare == doctest::Approx(4.0));

  Valuation solo = Valuation::unit_demand({1.0, 7.0});
  CHECK(opt_welfare({solo}, 2).welfare == doctest::Approx(7.0));
}

TEST_CASE("route agreement and strong duality on random instances") {
  Rng rng(2024ull);
  for (int trial = 0; trial < 25; ++trial) {
    int m = 2 + rng.index(5);
    int n = 1 + rng.index(3);
    Instance inst = generate_instance(trial % 2 == 0 ? "xos-random" : "additive-iid", m, n, 1,
                                      rng.next_u64());
    std::vector<Valuation> vals;
    for (const auto& d : inst.agents) vals.push_back(d.atom(0).v);
    MarginalCaps caps = MarginalCaps::uniform(m, rng.uniform(0.05, 1.0));
    ConfigLpSolution dense = solve_config_lp(vals, caps, LpRoute::dense);
    ConfigLpSolution colgen = solve_config_lp(vals, caps, LpRoute::column_generation);
    CHECK(std::fabs(dense.objective - colgen.objective) <=
          1e-6 * (1.0 + std::fabs(dense.objective)));
    check_solution_invariants(vals, caps, dense);
    check_solution_invariants(vals, caps, colgen);
  }
}

TEST_CASE("f is monotone in the cap") {
  Rng rng(55ull);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst = generate_instance("table-random-subadditive", 4, 1, 1, rng.next_u64());
    const Valuation& v = inst.agents[0].atom(0).v;
    double prev = -1.0;
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
      double f = f_value(v, q);
      CHECK(f >= prev - 1e-9);
      prev = f;
    }
  }
}

TEST_CASE("bayes program with one profile equals the plain program") {
  Instance inst;
  inst.m = 3;
  inst.agents.push_back(
      ValuationDistribution::point_mass(Valuation::xos(3, {{1.0, 0.5, 0.0}, {0.0, 0.0, 2.0}})));
  inst.agents.push_back(ValuationDistribution::point_mass(Valuation::additive({0.5, 0.5, 0.5})));
  std::vector<Profile> profiles = enumerate_profiles(inst);
  MarginalCaps caps = MarginalCaps::uniform(3, 0.5);
  BayesLpSolution bayes = solve_bayes_config_lp(inst, profiles, caps);
  std::vector<Valuation> vals;
  for (const auto& d : inst.agents) vals.push_back(d.atom(0).v);
  ConfigLpSolution plain = solve_config_lp(vals, caps);
  CHECK(bayes.objective == doctest::Approx(plain.objective).epsilon(1e-7));
  CHECK(std::fabs(bayes.objective - bayes.dual_objective) <= 1e-6 * (1.0 + bayes.objective));
}

TEST_CASE("interim caps at zero allow nothing") {
  Instance inst;
  inst.m = 2;
  inst.agents.push_back(ValuationDistribution::point_mass(Valuation::additive({1.0, 1.0})));
  std::vector<Profile> profiles = enumerate_profiles(inst);
  BayesLpSolution sol = solve_bayes_config_lp(inst, profiles, InterimCaps::uniform(inst, 0.0));
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("single-agent interim program separates over the support") {
  Instance inst;
  inst.m = 2;
  inst.agents.push_back(ValuationDistribution(
      {{0.5, Valuation::additive({1.0, 0.2})}, {0.5, Valuation::unit_demand({0.8, 0.8})}}));
  std::vector<Profile> profiles = enumerate_profiles(inst);
  BayesLpSolution sol = solve_bayes_config_lp(inst, profiles, InterimCaps::uniform(inst, 0.5));
  double avg = 0.5 * f_value(inst.agents[0].atom(0).v, 0.5) +
               0.5 * f_value(inst.agents[0].atom(1).v, 0.5);
  CHECK(sol.objective == doctest::Approx(avg).epsilon(1e-7));
}

TEST_CASE("interim feasibility of the bayes solution") {
  Instance inst;
  inst.m = 2;
  inst.agents.push_back(ValuationDistribution(
      {{0.5, Valuation::additive({1.0, 0.0})}, {0.5, Valuation::additive({0.0, 1.0})}}));
  inst.agents.push_back(
      ValuationDistribution::point_mass(Valuation::unit_demand({0.6, 0.6})));
  std::vector<Profile> profiles = enumerate_profiles(inst);
  InterimCaps caps = InterimCaps::uniform(inst, 0.4);
  BayesLpSolution sol = solve_bayes_config_lp(inst, profiles, caps, 1.0);

  // Re-accumulate interim marginals from the returned columns.
  int n = inst.num_agents();
  std::vector<std::vector<std::vector<double>>> marg(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    marg[std::size_t(i)].assign(std::size_t(inst.agents[std::size_t(i)].support_size()),
                                std::vector<double>(std::size_t(inst.m), 0.0));
  }
  for (const BayesColumn& c : sol.columns) {
    const Profile& pr = profiles[std::size_t(c.profile)];
    int atom = pr.atom[std::size_t(c.agent)];
    double cond = pr.prob / inst.agents[std::size_t(c.agent)].atom(atom).p;
    for (int j : c.set.items()) {
      marg[std::size_t(c.agent)][std::size_t(atom)][std::size_t(j)] += cond * c.weight;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < inst.agents[std::size_t(i)].support_size(); ++a) {
      for (int j = 0; j < inst.m; ++j) {
        CHECK(marg[std::size_t(i)][std::size_t(a)][std::size_t(j)] <=
              caps.z[std::size_t(i)][std::size_t(a)][std::size_t(j)] + 1e-7);
      }
    }
  }
}

TEST_CASE("caps must live in the unit interval") {
  CHECK_THROWS_AS(MarginalCaps::uniform(2, 1.5).validate(), InputError);
  CHECK_THROWS_AS(MarginalCaps::uniform(2, -0.1).validate(), InputError);
  CHECK_NOTHROW(MarginalCaps::uniform(2, 1.0).validate());
}
