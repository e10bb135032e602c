#include "subauction/valuation.hpp"

#include <algorithm>
#include <cmath>

#include "subauction/errors.hpp"

namespace subauction {

struct Valuation::Data {
  ValuationKind kind = ValuationKind::additive;
  int m = 0;
  std::vector<double> weights;               // additive, unit_demand
  std::vector<std::vector<double>> clauses;  // xos
  std::vector<double> table;                 // table
  std::shared_ptr<const GapFunction> gap;
  std::shared_ptr<const StackedFunction> layers;
  std::vector<std::pair<double, Valuation>> terms;  // scaled_sum
};

namespace {

void check_weights(const std::vector<double>& w, const char* what) {
  if (static_cast<int>(w.size()) > kMaxItems) {
    throw CapabilityError(std::string(what) + ": too many items");
  }
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) {
      throw InputError(std::string(what) + ": weights must be finite and >= 0");
    }
  }
}

}  // namespace

std::string to_string(ValuationKind k) {
  switch (k) {
    case ValuationKind::additive: return "additive";
    case ValuationKind::unit_demand: return "unit_demand";
    case ValuationKind::xos: return "xos";
    case ValuationKind::table: return "table";
    case ValuationKind::set_cover_gap: return "set_cover_gap";
    case ValuationKind::stacked: return "stacked";
    case ValuationKind::scaled_sum: return "scaled_sum";
  }
  return "?";
}

Valuation::Valuation() : data_(std::make_shared<Data>()) {}

Valuation Valuation::additive(std::vector<double> weights) {
  check_weights(weights, "additive");
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::additive;
  d->m = static_cast<int>(weights.size());
  d->weights = std::move(weights);
  return Valuation(d);
}

Valuation Valuation::unit_demand(std::vector<double> weights) {
  check_weights(weights, "unit_demand");
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::unit_demand;
  d->m = static_cast<int>(weights.size());
  d->weights = std::move(weights);
  return Valuation(d);
}

Valuation Valuation::xos(int m, std::vector<std::vector<double>> clauses) {
  if (m < 0 || m > kMaxItems) throw InputError("xos: item count out of range");
  for (const auto& c : clauses) {
    if (static_cast<int>(c.size()) != m) throw InputError("xos: clause length must equal m");
    check_weights(c, "xos clause");
  }
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::xos;
  d->m = m;
  d->clauses = std::move(clauses);
  return Valuation(d);
}

Valuation Valuation::table(int m, std::vector<double> values) {
  if (m < 0 || m > 16) throw CapabilityError("table: explicit tables are sized for m <= 16");
  if (values.size() != (1u << m)) throw InputError("table: needs exactly 2^m values");
  for (double x : values) {
    if (!std::isfinite(x) || x < 0.0) throw InputError("table: values must be finite and >= 0");
  }
  if (values[0] != 0.0) throw InputError("table: v(empty) must be 0");
  for (std::uint32_t s = 1; s < (1u << m); ++s) {
    for (int j = 0; j < m; ++j) {
      if ((s >> j) & 1u) {
        if (values[s] < values[s & ~(1u << j)]) {
          throw InputError("table: values must be monotone");
        }
      }
    }
  }
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::table;
  d->m = m;
  d->table = std::move(values);
  return Valuation(d);
}

Valuation Valuation::set_cover_gap(int k) {
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::set_cover_gap;
  d->gap = std::make_shared<GapFunction>(k);
  d->m = d->gap->num_items();
  return Valuation(d);
}

Valuation Valuation::stacked(int levels) {
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::stacked;
  d->layers = std::make_shared<StackedFunction>(levels);
  d->m = d->layers->num_items();
  return Valuation(d);
}

Valuation Valuation::scaled_sum(std::vector<std::pair<double, Valuation>> terms) {
  if (terms.empty()) throw InputError("scaled_sum: needs at least one term");
  int m = terms[0].second.num_items();
  for (const auto& [s, v] : terms) {
    if (!std::isfinite(s) || s < 0.0) throw InputError("scaled_sum: scales must be finite and >= 0");
    if (v.num_items() != m) throw InputError("scaled_sum: terms must share the item count");
  }
  auto d = std::make_shared<Data>();
  d->kind = ValuationKind::scaled_sum;
  d->m = m;
  d->terms = std::move(terms);
  return Valuation(d);
}

ValuationKind Valuation::kind() const { return data_->kind; }
int Valuation::num_items() const { return data_->m; }

double Valuation::value(ItemSet s) const {
  const Data& d = *data_;
  if (d.m < 32 && (s.bits() >> d.m) != 0) {
    throw InputError("valuation applied to items beyond its range");
  }
  switch (d.kind) {
    case ValuationKind::additive: {
      double t = 0.0;
      for (std::uint32_t b = s.bits(); b != 0; b &= b - 1) t += d.weights[std::countr_zero(b)];
      return t;
    }
    case ValuationKind::unit_demand: {
      double t = 0.0;
      for (std::uint32_t b = s.bits(); b != 0; b &= b - 1) {
        t = std::max(t, d.weights[std::countr_zero(b)]);
      }
      return t;
    }
    case ValuationKind::xos: {
      double best = 0.0;
      for (const auto& c : d.clauses) {
        double t = 0.0;
        for (std::uint32_t b = s.bits(); b != 0; b &= b - 1) t += c[std::countr_zero(b)];
        best = std::max(best, t);
      }
      return best;
    }
    case ValuationKind::table:
      return d.table[s.bits()];
    case ValuationKind::set_cover_gap:
      return d.gap->value(s.bits());
    case ValuationKind::stacked:
      return d.layers->value(s.bits());
    case ValuationKind::scaled_sum: {
      double t = 0.0;
      for (const auto& [sc, v] : d.terms) t += sc * v.value(s);
      return t;
    }
  }
  return 0.0;
}

DemandResult Valuation::demand(const PriceVector& prices, ItemSet available) const {
  const Data& d = *data_;
  if (prices.size() != d.m) throw InputError("demand: price vector has the wrong length");
  ItemSet buyable = prices.for_sale(available);

  if (d.kind == ValuationKind::additive) {
    // Take items with positive margin; zero-margin items are taken exactly
    // when they add value (the higher-value tie rule).
    ItemSet s;
    for (int j : buyable.items()) {
      double margin = d.weights[j] - prices[j];
      if (margin > 0.0 || (margin == 0.0 && d.weights[j] > 0.0)) s = s.with(j);
    }
    double val = value(s);
    return {s, val - prices.total(s), val};
  }

  if (d.kind == ValuationKind::unit_demand) {
    // Only the empty set and singletons can win under the tie rules.
    DemandResult best{ItemSet(), 0.0, 0.0};
    for (int j : buyable.items()) {
      double u = d.weights[j] - prices[j];
      double v = d.weights[j];
      std::uint32_t mask = 1u << j;
      if (u > best.utility ||
          (u == best.utility &&
           (v > best.value || (v == best.value && mask < best.set.bits() && !best.set.empty())))) {
        best = {ItemSet(mask), u, v};
      }
    }
    return best;
  }

  if (buyable.size() > 20) {
    throw CapabilityError("demand: exhaustive search is sized for at most 20 purchasable items");
  }
  DemandResult best{ItemSet(), 0.0, 0.0};
  bool first = true;
  for_each_subset(buyable.bits(), [&](std::uint32_t s) {
    ItemSet set(s);
    double v = value(set);
    double u = v - prices.total(set);
    if (first || u > best.utility ||
        (u == best.utility &&
         (v > best.value || (v == best.value && s < best.set.bits())))) {
      best = {set, u, v};
      first = false;
    }
  });
  return best;
}

std::vector<double> Valuation::full_table() const {
  if (data_->m > 16) throw CapabilityError("full_table: sized for m <= 16");
  std::vector<double> t(1u << data_->m);
  for (std::uint32_t s = 0; s < t.size(); ++s) t[s] = value(ItemSet(s));
  return t;
}

bool Valuation::is_subadditive(double tol) const {
  if (data_->m > 14) throw CapabilityError("is_subadditive: exhaustive check is sized for m <= 14");
  std::vector<double> t = full_table();
  const std::uint32_t full = (1u << data_->m) - 1u;
  for (std::uint32_t s = 1; s <= full; ++s) {
    std::uint32_t comp = full & ~s;
    bool ok = true;
    for_each_subset(comp, [&](std::uint32_t u) {
      if (u != 0 && t[s | u] > t[s] + t[u] + tol) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

nlohmann::json Valuation::to_json() const {
  const Data& d = *data_;
  nlohmann::json j;
  j["kind"] = to_string(d.kind);
  switch (d.kind) {
    case ValuationKind::additive:
    case ValuationKind::unit_demand:
      j["weights"] = d.weights;
      break;
    case ValuationKind::xos:
      j["m"] = d.m;
      j["clauses"] = d.clauses;
      break;
    case ValuationKind::table:
      j["m"] = d.m;
      j["values"] = d.table;
      break;
    case ValuationKind::set_cover_gap:
      j["k"] = d.gap->k();
      break;
    case ValuationKind::stacked:
      j["L"] = d.layers->levels();
      break;
    case ValuationKind::scaled_sum: {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& [s, v] : d.terms) {
        terms.push_back({{"scale", s}, {"valuation", v.to_json()}});
      }
      j["terms"] = std::move(terms);
      break;
    }
  }
  return j;
}

Valuation Valuation::from_json(const nlohmann::json& j) {
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "additive") return additive(j.at("weights").get<std::vector<double>>());
    if (kind == "unit_demand") return unit_demand(j.at("weights").get<std::vector<double>>());
    if (kind == "xos") {
      return xos(j.at("m").get<int>(), j.at("clauses").get<std::vector<std::vector<double>>>());
    }
    if (kind == "table") {
      return table(j.at("m").get<int>(), j.at("values").get<std::vector<double>>());
    }
    if (kind == "set_cover_gap") return set_cover_gap(j.at("k").get<int>());
    if (kind == "stacked") return stacked(j.at("L").get<int>());
    if (kind == "scaled_sum") {
      std::vector<std::pair<double, Valuation>> terms;
      for (const auto& t : j.at("terms")) {
        terms.emplace_back(t.at("scale").get<double>(), from_json(t.at("valuation")));
      }
      return scaled_sum(std::move(terms));
    }
    throw InputError("unknown valuation kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed valuation object: ") + e.what());
  }
}

}  // namespace subauction
