#include "subauction/instance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "subauction/errors.hpp"

namespace subauction {

ValuationDistribution::ValuationDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InputError("valuation distribution needs at least one atom");
  double sum = 0.0;
  int m = atoms_[0].v.num_items();
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.p) || a.p < 0.0) throw InputError("atom probabilities must be >= 0");
    if (a.v.num_items() != m) throw InputError("atoms must share the item count");
    sum += a.p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw InputError("atom probabilities must sum to 1");
}

ValuationDistribution ValuationDistribution::point_mass(Valuation v) {
  return ValuationDistribution({Atom{1.0, std::move(v)}});
}

int ValuationDistribution::num_items() const { return atoms_[0].v.num_items(); }

int ValuationDistribution::sample_index(Rng& rng) const {
  double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < support_size(); ++i) {
    acc += atoms_[i].p;
    if (u < acc) return i;
  }
  return support_size() - 1;
}

nlohmann::json ValuationDistribution::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Atom& a : atoms_) {
    arr.push_back({{"p", a.p}, {"valuation", a.v.to_json()}});
  }
  return arr;
}

ValuationDistribution ValuationDistribution::from_json(const nlohmann::json& j) {
  try {
    std::vector<Atom> atoms;
    for (const auto& e : j) {
      atoms.push_back(Atom{e.at("p").get<double>(), Valuation::from_json(e.at("valuation"))});
    }
    return ValuationDistribution(std::move(atoms));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed valuation distribution: ") + e.what());
  }
}

std::vector<int> Instance::arrival_order() const {
  if (order) return *order;
  std::vector<int> o(num_agents());
  for (int i = 0; i < num_agents(); ++i) o[i] = i;
  return o;
}

bool Instance::deterministic() const {
  return std::all_of(agents.begin(), agents.end(),
                     [](const ValuationDistribution& d) { return d.support_size() == 1; });
}

double Instance::max_value_bound() const {
  double total = 0.0;
  ItemSet all = ItemSet::full(m);
  for (const ValuationDistribution& d : agents) {
    double best = 0.0;
    for (const auto& a : d.atoms()) best = std::max(best, a.v.value(all));
    total += best;
  }
  return total;
}

void Instance::validate() const {
  if (m < 0 || m > kMaxItems) throw InputError("instance item count out of range");
  if (agents.empty()) throw InputError("instance needs at least one agent");
  for (const ValuationDistribution& d : agents) {
    if (d.support_size() == 0) throw InputError("agent with empty support");
    if (d.num_items() != m) throw InputError("agent valuations disagree with instance item count");
  }
  if (order) {
    std::vector<int> o = *order;
    if (static_cast<int>(o.size()) != num_agents()) {
      throw InputError("arrival order must list every agent exactly once");
    }
    std::sort(o.begin(), o.end());
    for (int i = 0; i < num_agents(); ++i) {
      if (o[i] != i) throw InputError("arrival order must be a permutation of the agents");
    }
  }
}

nlohmann::json Instance::to_json() const {
  nlohmann::json j;
  j["m"] = m;
  nlohmann::json arr = nlohmann::json::array();
  for (const ValuationDistribution& d : agents) arr.push_back(d.to_json());
  j["agents"] = std::move(arr);
  if (order) j["order"] = *order;
  return j;
}

Instance Instance::from_json(const nlohmann::json& j) {
  try {
    Instance inst;
    inst.m = j.at("m").get<int>();
    for (const auto& a : j.at("agents")) {
      inst.agents.push_back(ValuationDistribution::from_json(a));
    }
    if (j.contains("order")) inst.order = j.at("order").get<std::vector<int>>();
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed instance: ") + e.what());
  }
}

Instance Instance::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return from_json(j);
}

void Instance::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write instance file: " + path);
  out << to_json().dump(2) << "\n";
}

std::vector<Profile> enumerate_profiles(const Instance& inst, std::size_t cap) {
  inst.validate();
  std::size_t count = 1;
  for (const ValuationDistribution& d : inst.agents) {
    count *= static_cast<std::size_t>(d.support_size());
    if (count > cap) throw CapabilityError("profile space exceeds the enumeration cap");
  }
  std::vector<Profile> out;
  out.reserve(count);
  int n = inst.num_agents();
  std::vector<int> idx(n, 0);
  while (true) {
    Profile pr;
    pr.atom = idx;
    pr.prob = 1.0;
    for (int i = 0; i < n; ++i) pr.prob *= inst.agents[i].atom(idx[i]).p;
    out.push_back(std::move(pr));
    int i = n - 1;
    while (i >= 0 && idx[i] + 1 == inst.agents[i].support_size()) {
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++idx[i];
  }
  return out;
}

namespace {

std::vector<double> random_probs(Rng& rng, int support) {
  std::vector<double> p(support);
  double sum = 0.0;
  for (double& x : p) {
    x = rng.uniform(0.2, 1.0);
    sum += x;
  }
  double acc = 0.0;
  for (int i = 0; i + 1 < support; ++i) {
    p[i] = p[i] / sum;
    acc += p[i];
  }
  p[support - 1] = 1.0 - acc;  // exact complement so the sum is exactly 1
  return p;
}

void check_gen_args(int m, int n, int support) {
  if (m < 1 || m > kMaxItems) throw InputError("generator: m out of range");
  if (n < 1) throw InputError("generator: need at least one agent");
  if (support < 1) throw InputError("generator: support must be >= 1");
}

std::vector<double> random_weights(Rng& rng, int m) {
  std::vector<double> w(m);
  for (double& x : w) x = rng.uniform(0.05, 1.0);
  return w;
}

}  // namespace

Instance gen_additive_iid(int m, int n, int support, std::uint64_t seed) {
  check_gen_args(m, n, support);
  Instance inst;
  inst.m = m;
  for (int i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, 1, i));
    std::vector<double> probs = random_probs(rng, support);
    std::vector<ValuationDistribution::Atom> atoms;
    for (int s = 0; s < support; ++s) {
      atoms.push_back({probs[s], Valuation::additive(random_weights(rng, m))});
    }
    inst.agents.emplace_back(std::move(atoms));
  }
  return inst;
}

Instance gen_unit_demand(int m, int n, int support, std::uint64_t seed) {
  check_gen_args(m, n, support);
  Instance inst;
  inst.m = m;
  for (int i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, 2, i));
    std::vector<double> probs = random_probs(rng, support);
    std::vector<ValuationDistribution::Atom> atoms;
    for (int s = 0; s < support; ++s) {
      atoms.push_back({probs[s], Valuation::unit_demand(random_weights(rng, m))});
    }
    inst.agents.emplace_back(std::move(atoms));
  }
  return inst;
}

Instance gen_xos_random(int m, int n, int support, std::uint64_t seed) {
  check_gen_args(m, n, support);
  Instance inst;
  inst.m = m;
  for (int i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, 3, i));
    std::vector<double> probs = random_probs(rng, support);
    std::vector<ValuationDistribution::Atom> atoms;
    for (int s = 0; s < support; ++s) {
      int clauses = 2 + rng.index(std::max(1, m - 1));
      std::vector<std::vector<double>> cs(clauses);
      for (auto& c : cs) {
        c.assign(m, 0.0);
        for (int j = 0; j < m; ++j) {
          if (rng.uniform() < 0.7) c[j] = rng.uniform(0.05, 1.0);
        }
      }
      atoms.push_back({probs[s], Valuation::xos(m, std::move(cs))});
    }
    inst.agents.emplace_back(std::move(atoms));
  }
  return inst;
}

Instance gen_table_random_subadditive(int m, int n, int support, std::uint64_t seed) {
  check_gen_args(m, n, support);
  if (m > 12) throw CapabilityError("table-random-subadditive generation is sized for m <= 12");
  Instance inst;
  inst.m = m;
  for (int i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, 4, i));
    std::vector<double> probs = random_probs(rng, support);
    std::vector<ValuationDistribution::Atom> atoms;
    for (int s = 0; s < support; ++s) {
      // Perturbed mixture of subadditive parts, monotone-repaired, then
      // rejection-tested; the noise makes rejection genuinely possible. Its
      // amplitude shrinks with m because the number of disjoint pairs that
      // can break subadditivity grows as 3^m.
      double amp = std::min(0.1, 3.0 / (double(m) * double(m)));
      Valuation v;
      bool ok = false;
      for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
        std::vector<double> w = random_weights(rng, m);
        double total = 0.0;
        for (double x : w) total += x;
        double capv = rng.uniform(0.4, 0.9) * total;
        std::vector<double> u = random_weights(rng, m);
        std::vector<double> t(1u << m, 0.0);
        for (std::uint32_t sset = 1; sset < t.size(); ++sset) {
          double add = 0.0, best = 0.0;
          for (std::uint32_t b = sset; b != 0; b &= b - 1) {
            int j = std::countr_zero(b);
            add += w[j];
            best = std::max(best, u[j]);
          }
          double base = 0.6 * std::min(add, capv) + 0.4 * best;
          t[sset] = base * rng.uniform(1.0 - amp, 1.0 + amp);
          for (std::uint32_t b = sset; b != 0; b &= b - 1) {
            t[sset] = std::max(t[sset], t[sset & ~(1u << std::countr_zero(b))]);
          }
        }
        v = Valuation::table(m, std::move(t));
        ok = v.is_subadditive();
      }
      if (!ok) throw NumericError("table-random-subadditive: rejection sampling did not converge");
      atoms.push_back({probs[s], v});
    }
    inst.agents.emplace_back(std::move(atoms));
  }
  return inst;
}

Instance gen_lowerbound(int levels) {
  Instance inst;
  Valuation v = Valuation::stacked(levels);
  inst.m = v.num_items();
  inst.agents.push_back(ValuationDistribution::point_mass(std::move(v)));
  return inst;
}

Instance generate_instance(const std::string& family, int m, int n, int support,
                           std::uint64_t seed) {
  if (family == "additive-iid") return gen_additive_iid(m, n, support, seed);
  if (family == "unit-demand") return gen_unit_demand(m, n, support, seed);
  if (family == "xos-random") return gen_xos_random(m, n, support, seed);
  if (family == "table-random-subadditive") return gen_table_random_subadditive(m, n, support, seed);
  if (family.rfind("lowerbound-", 0) == 0) {
    try {
      int L = std::stoi(family.substr(std::string("lowerbound-").size()));
      return gen_lowerbound(L);
    } catch (const std::logic_error&) {
      throw InputError("bad level suffix in family name: " + family);
    }
  }
  throw InputError("unknown instance family: " + family);
}

}  // namespace subauction
