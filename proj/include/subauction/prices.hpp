#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "subauction/errors.hpp"
#include "subauction/itemset.hpp"

namespace subauction {

inline constexpr double kNotForSale = std::numeric_limits<double>::infinity();

// Per-item posted prices. Entries are finite and >= 0, or +infinity as a
// "not for sale" sentinel for items outside every optimal bundle.
class PriceVector {
 public:
  PriceVector() = default;
  explicit PriceVector(std::vector<double> p) : p_(std::move(p)) { validate(); }
  static PriceVector zeros(int m) { return PriceVector(std::vector<double>(m, 0.0)); }

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int j) const { return p_[j]; }
  double& operator[](int j) { return p_[j]; }
  const std::vector<double>& values() const { return p_; }

  bool finite(int j) const { return std::isfinite(p_[j]); }

  // Sum over S; +infinity as soon as S contains a not-for-sale item.
  double total(ItemSet s) const {
    double t = 0.0;
    for (int j : s.items()) t += p_[j];
    return t;
  }

  // Items of `from` that are actually purchasable.
  ItemSet for_sale(ItemSet from) const {
    ItemSet out;
    for (int j : from.items()) {
      if (finite(j)) out = out.with(j);
    }
    return out;
  }

  void validate() const {
    for (double v : p_) {
      if (std::isnan(v) || v < 0.0) {
        throw InputError("prices must be >= 0 (or +inf for not-for-sale)");
      }
    }
  }

 private:
  std::vector<double> p_;
};

// JSON encoding: an array of numbers, with null for not-for-sale entries
// (JSON has no infinity literal).
inline nlohmann::json price_vector_to_json(const PriceVector& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (int j = 0; j < p.size(); ++j) {
    if (p.finite(j)) {
      arr.push_back(p[j]);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

inline PriceVector price_vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("prices must be a JSON array");
  std::vector<double> p;
  p.reserve(j.size());
  for (const auto& e : j) {
    if (e.is_null()) {
      p.push_back(kNotForSale);
    } else if (e.is_number()) {
      p.push_back(e.get<double>());
    } else {
      throw InputError("price entries must be numbers or null");
    }
  }
  return PriceVector(std::move(p));
}

}  // namespace subauction
