#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "subauction/gapfn.hpp"
#include "subauction/itemset.hpp"
#include "subauction/prices.hpp"

namespace subauction {

enum class ValuationKind { additive, unit_demand, xos, table, set_cover_gap, stacked, scaled_sum };

std::string to_string(ValuationKind k);

struct DemandResult {
  ItemSet set;
  double utility = 0.0;
  double value = 0.0;
};

// A normalized (v(empty) = 0) monotone valuation over m items. Immutable;
// copies share the underlying data. All kinds are validated at construction.
class Valuation {
 public:
  Valuation();  // additive with no items

  static Valuation additive(std::vector<double> weights);
  static Valuation unit_demand(std::vector<double> weights);
  static Valuation xos(int m, std::vector<std::vector<double>> clauses);
  static Valuation table(int m, std::vector<double> values);
  static Valuation set_cover_gap(int k);
  static Valuation stacked(int levels);
  static Valuation scaled_sum(std::vector<std::pair<double, Valuation>> terms);

  ValuationKind kind() const;
  int num_items() const;

  double value(ItemSet s) const;

  // Utility-maximizing affordable subset of `available`. Ties resolve to the
  // higher-value set, then to the lexicographically smallest bitmask. Items
  // priced +inf are never bought. Non-closed-form kinds enumerate all
  // subsets, so |available| is capped at 20.
  DemandResult demand(const PriceVector& prices, ItemSet available) const;

  // Exhaustive check of v(S u T) <= v(S) + v(T) + tol over disjoint pairs
  // (equivalent to the general definition for monotone valuations). m <= 14.
  bool is_subadditive(double tol = 1e-9) const;

  // Full value table indexed by raw bitmask; m <= 16.
  std::vector<double> full_table() const;

  nlohmann::json to_json() const;
  static Valuation from_json(const nlohmann::json& j);

 private:
  struct Data;
  explicit Valuation(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

}  // namespace subauction
