#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subauction/rng.hpp"
#include "subauction/valuation.hpp"

namespace subauction {

// Finite-support distribution over valuations for one agent. Probabilities
// are >= 0 and sum to 1 within 1e-9; all atoms share the item count.
class ValuationDistribution {
 public:
  struct Atom {
    double p = 1.0;
    Valuation v;
  };

  ValuationDistribution() = default;
  explicit ValuationDistribution(std::vector<Atom> atoms);
  static ValuationDistribution point_mass(Valuation v);

  int num_items() const;
  int support_size() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int i) const { return atoms_[i]; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  int sample_index(Rng& rng) const;

  nlohmann::json to_json() const;
  static ValuationDistribution from_json(const nlohmann::json& j);

 private:
  std::vector<Atom> atoms_;
};

// A market: m items and one valuation distribution per agent, with an
// optional fixed arrival order (default: agent index order).
struct Instance {
  int m = 0;
  std::vector<ValuationDistribution> agents;
  std::optional<std::vector<int>> order;

  int num_agents() const { return static_cast<int>(agents.size()); }
  std::vector<int> arrival_order() const;
  bool deterministic() const;

  // Upper bound on any realized optimal welfare: sum over agents of the
  // largest v_i(M) in the support. Used to rescale before sampling bounds.
  double max_value_bound() const;

  void validate() const;

  nlohmann::json to_json() const;
  static Instance from_json(const nlohmann::json& j);
  static Instance load(const std::string& path);
  void save(const std::string& path) const;
};

// One joint realization: atom index per agent and its probability.
struct Profile {
  double prob = 1.0;
  std::vector<int> atom;
};

// All joint realizations in lexicographic order (agent 0 outermost). The
// support-size product is capped.
std::vector<Profile> enumerate_profiles(const Instance& inst, std::size_t cap = 1000000);

inline const Valuation& profile_valuation(const Instance& inst, const Profile& pr, int i) {
  return inst.agents[i].atom(pr.atom[i]).v;
}

// Instance generators used by the CLI and the test harness.
Instance gen_additive_iid(int m, int n, int support, std::uint64_t seed);
Instance gen_unit_demand(int m, int n, int support, std::uint64_t seed);
Instance gen_xos_random(int m, int n, int support, std::uint64_t seed);
Instance gen_table_random_subadditive(int m, int n, int support, std::uint64_t seed);
Instance gen_lowerbound(int levels);
Instance generate_instance(const std::string& family, int m, int n, int support,
                           std::uint64_t seed);

}  // namespace subauction
