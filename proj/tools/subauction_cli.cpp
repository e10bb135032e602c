// Command-line harness around the library: instance generation, price
// computation, posted-price simulation sweeps, game and lower-bound
// evaluation, revenue mechanisms, and bound verification.
//
// Exit codes: 0 success, 1 input error, 2 capability error,
// 3 numeric or verification failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subauction/csv.hpp"
#include "subauction/errors.hpp"
#include "subauction/game.hpp"
#include "subauction/instance.hpp"
#include "subauction/lowerbound.hpp"
#include "subauction/mechsim.hpp"
#include "subauction/pricing.hpp"
#include "subauction/prices.hpp"
#include "subauction/revenue.hpp"
#include "subauction/rng.hpp"
#include "subauction/valuation.hpp"
#include "subauction/welfare_lp.hpp"

namespace {

using namespace subauction;

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw InputError("failed while writing: " + path);
}

// JSON output goes to --out when given, else to stdout.
void emit_json(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text_file(out_path, j.dump(2) + "\n");
  }
}

void emit_csv(const CsvTable& table, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << format_csv(table);
  } else {
    write_csv(out_path, table);
  }
}

// JSON has no infinity; non-finite summary numbers are spelled out.
nlohmann::json finite_or_string(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// Accepts either the output of compute-prices (object with "prices") or a
// bare JSON array; null entries mean not-for-sale.
PriceVector load_price_file(const std::string& path, int m) {
  nlohmann::json j = read_json_file(path);
  if (j.is_object() && j.contains("prices")) j = j.at("prices");
  PriceVector p = price_vector_from_json(j);
  if (p.size() != m) {
    throw InputError(path + ": expected " + std::to_string(m) + " prices, found " +
                     std::to_string(p.size()));
  }
  return p;
}

std::vector<std::vector<double>> load_matrix_file(const std::string& path, const std::string& key,
                                                  int rows, int cols) {
  nlohmann::json j = read_json_file(path);
  if (j.is_object() && j.contains(key)) j = j.at(key);
  std::vector<std::vector<double>> out;
  try {
    out = j.get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": expected a matrix under \"" + key + "\": " + e.what());
  }
  if (static_cast<int>(out.size()) != rows) {
    throw InputError(path + ": expected " + std::to_string(rows) + " rows");
  }
  for (const auto& row : out) {
    if (static_cast<int>(row.size()) != cols) {
      throw InputError(path + ": expected " + std::to_string(cols) + " entries per row");
    }
  }
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += '|';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += '|';
    out += csv_from_double(xs[i]);
  }
  return out;
}

// Arrival-order policy shared by simulate, verify, and pipeline.
struct OrderPolicy {
  std::string name = "fixed";  // fixed | all-permutations | random-k
  int k = 0;
  std::uint64_t seed = 0;
  bool seeded = false;
};

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.index(i + 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

// The deterministic order list a sweep enumerates.
std::vector<std::vector<int>> resolve_orders(const Instance& inst, const OrderPolicy& policy) {
  const int n = inst.num_agents();
  if (policy.name == "fixed") return {inst.arrival_order()};
  if (policy.name == "all-permutations") {
    if (n > 6) throw CapabilityError("all-permutations supports at most 6 agents");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<int>> all;
    do {
      all.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    return all;
  }
  if (policy.name == "random-k") {
    if (policy.k <= 0) throw InputError("random-k needs --k >= 1");
    if (!policy.seeded) throw InputError("random-k needs an explicit --seed");
    std::vector<std::vector<int>> orders;
    orders.reserve(static_cast<std::size_t>(policy.k));
    for (int r = 0; r < policy.k; ++r) {
      Rng rng(substream_seed(policy.seed, 0x0edeull, static_cast<std::uint64_t>(r)));
      orders.push_back(random_permutation(n, rng));
    }
    return orders;
  }
  throw InputError("unknown order policy: " + policy.name);
}

// ---------------------------------------------------------------------------
// gen-instance

struct GenInstanceOpts {
  std::string family;
  int m = 4;
  int n = 2;
  int support = 2;
  std::uint64_t seed = 0;
  bool seeded = false;
  std::string out;
};

int run_gen_instance(const GenInstanceOpts& o) {
  const bool needs_seed = o.family.rfind("lowerbound-", 0) != 0;
  if (needs_seed && !o.seeded) {
    throw InputError("family " + o.family + " is randomized; pass an explicit --seed");
  }
  const Instance inst = generate_instance(o.family, o.m, o.n, o.support, o.seed);
  if (o.out.empty()) {
    std::cout << inst.to_json().dump(2) << "\n";
  } else {
    inst.save(o.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compute-prices

struct ComputePricesOpts {
  std::string instance;
  bool exact = false;
  double epsilon = 0.0;
  double zeta = 0.0;
  std::uint64_t seed = 0;
  bool have_epsilon = false;
  bool have_zeta = false;
  bool seeded = false;
  std::string sigma;  // interim allocation sidecar (implies the exact route)
  std::string out;
};

int run_compute_prices(const ComputePricesOpts& o) {
  const Instance inst = Instance::load(o.instance);
  nlohmann::json j;
  if (!o.sigma.empty()) {
    const InterimAllocation alloc = InterimAllocation::from_json(read_json_file(o.sigma), inst);
    const ExactPriceComputation exact = compute_prices_exact(inst, alloc.to_caps(inst));
    j = exact.to_json();
    j["method"] = "exact-interim";
  } else if (o.exact) {
    const ExactPriceComputation exact = compute_prices_exact(inst);
    j = exact.to_json();
    j["method"] = "exact";
  } else {
    if (!o.have_epsilon || !o.have_zeta) {
      throw InputError("pass --exact, or --epsilon and --zeta for the sampled route");
    }
    if (!o.seeded) throw InputError("the sampled route is randomized; pass an explicit --seed");
    const PriceComputation pc = compute_prices(inst, o.epsilon, o.zeta, o.seed);
    j = pc.to_json();
    j["method"] = "sampled";
  }
  j["instance"] = o.instance;
  emit_json(j, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string instance;
  std::string prices;
  OrderPolicy policy;
  int runs = 200;
  std::uint64_t seed = 0;
  bool seeded = false;
  std::string out;
};

// OPT of the realized profile, cached per atom tuple.
class OptCache {
 public:
  explicit OptCache(const Instance& inst) : inst_(inst) {}

  double opt(const std::vector<int>& atoms) {
    auto it = cache_.find(atoms);
    if (it != cache_.end()) return it->second;
    std::vector<Valuation> vals;
    vals.reserve(atoms.size());
    for (int i = 0; i < inst_.num_agents(); ++i) {
      vals.push_back(inst_.agents[i].atom(atoms[static_cast<std::size_t>(i)]).v);
    }
    const double w = opt_welfare(vals, inst_.m).welfare;
    cache_.emplace(atoms, w);
    return w;
  }

 private:
  const Instance& inst_;
  std::map<std::vector<int>, double> cache_;
};

double per_run_ratio(double opt, double welfare) {
  if (opt <= 0.0) return 1.0;  // nothing to gain, nothing lost
  if (welfare <= 0.0) return std::numeric_limits<double>::infinity();
  return opt / welfare;
}

int run_simulate(const SimulateOpts& o) {
  const Instance inst = Instance::load(o.instance);
  const PriceVector prices = load_price_file(o.prices, inst.m);
  prices.validate();
  if (o.runs <= 0) throw InputError("--runs must be >= 1");
  if (!o.seeded) throw InputError("simulate is randomized; pass an explicit --seed");

  // random-k pre-draws its order pool; fixed and all-permutations sample
  // per run below.
  std::vector<std::vector<int>> pool;
  if (o.policy.name == "random-k") {
    OrderPolicy pool_policy = o.policy;
    pool_policy.seed = o.seed;
    pool_policy.seeded = true;
    pool = resolve_orders(inst, pool_policy);
  } else if (o.policy.name != "fixed" && o.policy.name != "all-permutations") {
    throw InputError("unknown order policy: " + o.policy.name);
  }

  CsvTable table;
  table.header = {"run", "seed", "profile", "order", "welfare",
                  "revenue", "utilities", "ratio"};
  OptCache opt_cache(inst);
  for (int r = 0; r < o.runs; ++r) {
    const std::uint64_t run_seed = substream_seed(o.seed, 0x51u, static_cast<std::uint64_t>(r));
    Rng rng(run_seed);
    std::vector<int> atoms(static_cast<std::size_t>(inst.num_agents()));
    std::vector<Valuation> vals;
    vals.reserve(atoms.size());
    for (int i = 0; i < inst.num_agents(); ++i) {
      atoms[static_cast<std::size_t>(i)] = inst.agents[i].sample_index(rng);
      vals.push_back(inst.agents[i].atom(atoms[static_cast<std::size_t>(i)]).v);
    }
    std::vector<int> order;
    if (o.policy.name == "fixed") {
      order = inst.arrival_order();
    } else if (o.policy.name == "all-permutations") {
      order = random_permutation(inst.num_agents(), rng);
    } else {
      order = pool[static_cast<std::size_t>(rng.index(static_cast<int>(pool.size())))];
    }
    const MechanismRun run = run_posted_price(vals, prices, order);
    const double opt = opt_cache.opt(atoms);
    table.rows.push_back({std::to_string(r), std::to_string(run_seed), join_ints(atoms),
                          join_ints(order), csv_from_double(run.welfare),
                          csv_from_double(run.revenue), join_doubles(run.utilities),
                          csv_from_double(per_run_ratio(opt, run.welfare))});
  }
  emit_csv(table, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// game-value

struct GameValueOpts {
  std::string instance;
  int agent = 0;
  int atom = 0;
  double q = 0.5;
  std::string out;
};

int run_game_value(const GameValueOpts& o) {
  const Instance inst = Instance::load(o.instance);
  if (o.agent < 0 || o.agent >= inst.num_agents()) throw InputError("agent index out of range");
  if (o.atom < 0 || o.atom >= inst.agents[o.agent].support_size()) {
    throw InputError("atom index out of range");
  }
  const Valuation& v = inst.agents[o.agent].atom(o.atom).v;
  const GameResult res = game_value(v, ItemSet::full(inst.m), o.q);
  nlohmann::json j = res.to_json();
  j["agent"] = o.agent;
  j["atom"] = o.atom;
  j["f_q"] = f_value(v, o.q);
  j["f_q_squared"] = f_value(v, o.q * o.q);
  emit_json(j, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// lowerbound

struct LowerboundOpts {
  std::string instance;  // unused; the construction is parameterized by L
  int L = 1;
  std::vector<double> qs;
  bool sweep = false;
  std::uint64_t seed = 1;
  int samples = 20000;
  std::string out;
};

int run_lowerbound(const LowerboundOpts& o) {
  const StackedValuation sv = build_lower_bound(o.L);
  std::vector<double> qs = o.qs;
  if (o.sweep || qs.empty()) {
    for (double q : q_schedule(sv.num_items())) qs.push_back(q);
  }
  std::sort(qs.begin(), qs.end(), std::greater<double>());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

  const double v_m = sv.v.value(ItemSet::full(sv.num_items()));
  CsvTable table;
  table.header = {"q", "f_q", "f_q2", "best_response", "proof_bound", "v_m"};
  for (double q : qs) {
    const SetDistribution mu = adversary_mu(sv, q, o.seed, o.samples);
    const double br = best_response_value(sv, q, mu);
    table.rows.push_back({csv_from_double(q), csv_from_double(f_value(sv.v, q)),
                          csv_from_double(f_value(sv.v, q * q)), csv_from_double(br),
                          csv_from_double(proof_bound(sv, q)), csv_from_double(v_m)});
  }
  emit_csv(table, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// revenue-sim

struct RevenueAspeOpts {
  std::string instance;
  std::string prices;
  std::string beta;  // optional sidecar
  std::string out;
};

int run_revenue_aspe(const RevenueAspeOpts& o) {
  const Instance inst = Instance::load(o.instance);
  const PriceVector prices = load_price_file(o.prices, inst.m);
  prices.validate();
  std::vector<std::vector<double>> beta;
  if (!o.beta.empty()) {
    beta = load_matrix_file(o.beta, "beta", inst.num_agents(), inst.m);
  }
  const AspeSummary summary = run_aspe_exact(inst, prices, beta);
  const EntryFeeBound bound = entry_fee_bound_check(inst, prices, {}, beta);
  const IndependenceReport indep = check_item_independence(inst);
  nlohmann::json j = {{"instance", o.instance},
                      {"mechanism", "aspe"},
                      {"summary", summary.to_json()},
                      {"entry_fee_bound", bound.to_json()},
                      {"independence",
                       {{"independent", indep.independent}, {"warnings", indep.warnings}}}};
  emit_json(j, o.out);
  return 0;
}

struct RevenueRspmOpts {
  std::string instance;
  std::string prices;  // personalized n x m matrix
  std::string out;
};

int run_revenue_rspm(const RevenueRspmOpts& o) {
  const Instance inst = Instance::load(o.instance);
  const std::vector<std::vector<double>> prices =
      load_matrix_file(o.prices, "prices", inst.num_agents(), inst.m);
  const double revenue = expected_rspm_revenue(inst, prices);
  nlohmann::json j = {
      {"instance", o.instance}, {"mechanism", "rspm"}, {"expected_revenue", revenue}};
  emit_json(j, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// verify / pipeline shared checks

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct VerificationBundle {
  std::vector<CheckResult> checks;
  bool all_pass = true;
  double expected_opt = 0.0;
  double alg_avg = 0.0;    // expected welfare averaged over the order list
  double alg_worst = 0.0;  // worst order
  nlohmann::json utility_bound;  // null unless the exact route supplied lambdas
};

void add_check(VerificationBundle& b, const std::string& name, bool pass,
               const std::string& detail) {
  b.checks.push_back({name, pass, detail});
  b.all_pass = b.all_pass && pass;
}

VerificationBundle run_verification(const Instance& inst, const PriceVector& prices,
                                    const ExactPriceComputation* exact,
                                    const std::vector<std::vector<int>>& orders, double tol,
                                    bool enforce_guarantee) {
  VerificationBundle b;
  b.utility_bound = nullptr;

  // Accounting identity and nonnegative utilities per profile and order.
  double worst_gap = 0.0;
  double worst_utility = 0.0;
  const std::vector<Profile> profiles = enumerate_profiles(inst);
  for (const Profile& pr : profiles) {
    std::vector<Valuation> vals;
    vals.reserve(static_cast<std::size_t>(inst.num_agents()));
    for (int i = 0; i < inst.num_agents(); ++i) vals.push_back(profile_valuation(inst, pr, i));
    for (const auto& order : orders) {
      const MechanismRun run = run_posted_price(vals, prices, order);
      double u = 0.0;
      for (double x : run.utilities) {
        u += x;
        worst_utility = std::min(worst_utility, x);
      }
      worst_gap = std::max(worst_gap, std::fabs(run.welfare - (u + run.revenue)));
    }
  }
  add_check(b, "accounting", worst_gap <= 1e-9,
            "max |welfare - (utilities + revenue)| = " + csv_from_double(worst_gap));
  add_check(b, "nonnegative-utilities", worst_utility >= -1e-12,
            "min utility = " + csv_from_double(worst_utility));

  // Welfare guarantee at the schedule factor, per order.
  b.expected_opt = expected_opt_welfare_exact(inst);
  double alg_sum = 0.0;
  double alg_min = std::numeric_limits<double>::infinity();
  for (const auto& order : orders) {
    const double alg = expected_welfare_exact(inst, prices, order);
    alg_sum += alg;
    alg_min = std::min(alg_min, alg);
  }
  b.alg_avg = alg_sum / static_cast<double>(orders.size());
  b.alg_worst = alg_min;

  const double factor = guarantee_factor(inst.m);
  if (!enforce_guarantee) {
    add_check(b, "welfare-guarantee", true,
              "reported only: supplied prices carry no certificate; worst E[ALG] = " +
                  csv_from_double(alg_min));
  } else if (factor <= 0.0) {
    add_check(b, "welfare-guarantee", true,
              "vacuous for m <= 2 (guarantee factor " + csv_from_double(factor) + ")");
  } else {
    const double needed = factor * b.expected_opt - tol;
    add_check(b, "welfare-guarantee", alg_min >= needed,
              "worst E[ALG] = " + csv_from_double(alg_min) + ", needs >= " +
                  csv_from_double(needed));
  }

  // Utility lower bound via the certified lambda collection.
  if (exact != nullptr) {
    double min_slack = std::numeric_limits<double>::infinity();
    double min_hall = std::numeric_limits<double>::infinity();
    double min_key = std::numeric_limits<double>::infinity();
    nlohmann::json per_order = nlohmann::json::array();
    for (const auto& order : orders) {
      const UtilityBoundReport rep =
          verify_utility_bound(inst, prices, exact->lambda_by_profile, exact->alpha, order);
      min_slack = std::min(min_slack, rep.slack);
      min_hall = std::min(min_hall, rep.hallucination_slack);
      min_key = std::min(min_key, rep.key_slack);
      nlohmann::json entry = rep.to_json();
      entry["order"] = order;
      per_order.push_back(std::move(entry));
    }
    b.utility_bound = std::move(per_order);
    add_check(b, "utility-bound", min_slack >= -tol,
              "min slack = " + csv_from_double(min_slack));
    add_check(b, "hallucination-slack", min_hall >= -tol,
              "min hallucination slack = " + csv_from_double(min_hall));
    add_check(b, "key-slack", min_key >= -tol, "min key slack = " + csv_from_double(min_key));
  }
  return b;
}

nlohmann::json checks_to_json(const VerificationBundle& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : b.checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return arr;
}

struct VerifyOpts {
  std::string instance;
  std::string prices;  // optional; empty recomputes the exact certificate
  OrderPolicy policy;
  double tol = 1e-6;
  bool require_guarantee = false;
  std::string out;
};

int run_verify(const VerifyOpts& o) {
  const Instance inst = Instance::load(o.instance);
  const std::vector<std::vector<int>> orders = resolve_orders(inst, o.policy);

  ExactPriceComputation exact;
  const ExactPriceComputation* exact_ptr = nullptr;
  PriceVector prices = PriceVector::zeros(inst.m);
  if (o.prices.empty()) {
    exact = compute_prices_exact(inst);
    prices = exact.prices;
    exact_ptr = &exact;
  } else {
    prices = load_price_file(o.prices, inst.m);
    prices.validate();
  }

  const bool enforce = exact_ptr != nullptr || o.require_guarantee;
  const VerificationBundle b = run_verification(inst, prices, exact_ptr, orders, o.tol, enforce);
  nlohmann::json j = {{"instance", o.instance},
                      {"prices", price_vector_to_json(prices)},
                      {"orders_checked", orders.size()},
                      {"expected_opt", b.expected_opt},
                      {"expected_alg_avg", b.alg_avg},
                      {"expected_alg_worst", b.alg_worst},
                      {"utility_bound", b.utility_bound},
                      {"checks", checks_to_json(b)},
                      {"all_pass", b.all_pass}};
  emit_json(j, o.out);
  return b.all_pass ? 0 : 3;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineOpts {
  std::string instance;
  std::string out_dir;
  bool exact = true;
  double epsilon = 0.0;
  double zeta = 0.0;
  bool have_epsilon = false;
  bool have_zeta = false;
  std::uint64_t seed = 0;
  bool seeded = false;
  OrderPolicy policy;
  double tol = 1e-6;
};

int run_pipeline(const PipelineOpts& o) {
  const Instance inst = Instance::load(o.instance);
  std::filesystem::create_directories(o.out_dir);
  const auto out_path = [&o](const char* name) {
    return (std::filesystem::path(o.out_dir) / name).string();
  };
  const std::vector<std::vector<int>> orders = resolve_orders(inst, o.policy);

  // Stage 1: prices.
  ExactPriceComputation exact;
  const ExactPriceComputation* exact_ptr = nullptr;
  PriceVector prices = PriceVector::zeros(inst.m);
  nlohmann::json prices_json;
  std::string method;
  const bool sampled = o.have_epsilon || o.have_zeta;
  if (sampled) {
    if (!o.have_epsilon || !o.have_zeta) {
      throw InputError("the sampled route needs both --epsilon and --zeta");
    }
    if (!o.seeded) throw InputError("the sampled route is randomized; pass an explicit --seed");
    const PriceComputation pc = compute_prices(inst, o.epsilon, o.zeta, o.seed);
    prices = pc.prices;
    prices_json = pc.to_json();
    method = "sampled";
  } else {
    exact = compute_prices_exact(inst);
    prices = exact.prices;
    exact_ptr = &exact;
    prices_json = exact.to_json();
    method = "exact";
  }
  prices_json["method"] = method;
  prices_json["instance"] = o.instance;
  write_text_file(out_path("prices.json"), prices_json.dump(2) + "\n");

  // Stage 2: exact per-profile simulation rows.
  const std::vector<Profile> profiles = enumerate_profiles(inst);
  if (profiles.size() * orders.size() > 200000) {
    throw CapabilityError("pipeline sweep would emit more than 200000 rows");
  }
  CsvTable runs;
  runs.header = {"profile", "prob", "order", "welfare", "revenue", "utilities", "opt", "ratio"};
  OptCache opt_cache(inst);
  for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
    const Profile& pr = profiles[pi];
    std::vector<Valuation> vals;
    vals.reserve(static_cast<std::size_t>(inst.num_agents()));
    for (int i = 0; i < inst.num_agents(); ++i) vals.push_back(profile_valuation(inst, pr, i));
    const double opt = opt_cache.opt(pr.atom);
    for (const auto& order : orders) {
      const MechanismRun run = run_posted_price(vals, prices, order);
      runs.rows.push_back({join_ints(pr.atom), csv_from_double(pr.prob), join_ints(order),
                           csv_from_double(run.welfare), csv_from_double(run.revenue),
                           join_doubles(run.utilities), csv_from_double(opt),
                           csv_from_double(per_run_ratio(opt, run.welfare))});
    }
  }
  write_csv(out_path("runs.csv"), runs);

  // Stage 3: verification and summary.
  const VerificationBundle b =
      run_verification(inst, prices, exact_ptr, orders, o.tol, exact_ptr != nullptr);
  const double factor = guarantee_factor(inst.m);
  const double bound = factor > 0.0 ? 1.0 / factor : std::numeric_limits<double>::infinity();
  const double measured_worst =
      b.alg_worst > 0.0 ? b.expected_opt / b.alg_worst
                        : (b.expected_opt > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  const double measured_avg =
      b.alg_avg > 0.0 ? b.expected_opt / b.alg_avg
                      : (b.expected_opt > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);

  nlohmann::json summary = {
      {"instance", o.instance},
      {"m", inst.m},
      {"agents", inst.num_agents()},
      {"method", method},
      {"q", prices_json.at("q")},
      {"schedule", q_schedule(inst.m)},
      {"guarantee_factor", factor},
      {"theoretical_ratio_bound", finite_or_string(bound)},
      {"expected_opt", b.expected_opt},
      {"expected_alg_avg", b.alg_avg},
      {"expected_alg_worst", b.alg_worst},
      {"measured_ratio_avg", finite_or_string(measured_avg)},
      {"measured_ratio_worst", finite_or_string(measured_worst)},
      {"orders_checked", orders.size()},
      {"utility_bound", b.utility_bound},
      {"checks", checks_to_json(b)},
      {"all_pass", b.all_pass},
  };
  write_text_file(out_path("summary.json"), summary.dump(2) + "\n");
  std::cout << "pipeline: " << (b.all_pass ? "all checks passed" : "CHECKS FAILED") << "; wrote "
            << out_path("prices.json") << ", " << out_path("runs.csv") << ", "
            << out_path("summary.json") << "\n";
  return b.all_pass ? 0 : 3;
}

void attach_order_policy(CLI::App* sc, OrderPolicy& policy) {
  sc->add_option("--order-policy", policy.name,
                 "Arrival orders to sweep: fixed | all-permutations | random-k")
      ->check(CLI::IsMember({"fixed", "all-permutations", "random-k"}));
  sc->add_option("--k", policy.k, "Number of random orders for random-k");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Posted-price mechanisms for subadditive combinatorial auctions: "
      "configuration-LP prices, equal-marginals games, simulation sweeps, "
      "lower-bound constructions, and entry-fee revenue checks."};
  app.require_subcommand(1);
  int rc = 0;

  GenInstanceOpts gen;
  auto* gen_sc = app.add_subcommand("gen-instance", "Generate an instance file");
  gen_sc->add_option("--family", gen.family,
                     "additive-iid | unit-demand | xos-random | table-random-subadditive | "
                     "lowerbound-<L>")
      ->required();
  gen_sc->add_option("--m", gen.m, "Number of items");
  gen_sc->add_option("--n", gen.n, "Number of agents");
  gen_sc->add_option("--support", gen.support, "Support size per agent");
  auto* gen_seed = gen_sc->add_option("--seed", gen.seed, "64-bit generation seed");
  gen_sc->add_option("--out", gen.out, "Output instance path (stdout when omitted)");
  gen_sc->callback([&] {
    gen.seeded = gen_seed->count() > 0;
    rc = run_gen_instance(gen);
  });

  ComputePricesOpts cp;
  auto* cp_sc = app.add_subcommand("compute-prices", "Compute static anonymous item prices");
  cp_sc->add_option("--instance", cp.instance, "Instance JSON path")->required();
  cp_sc->add_flag("--exact", cp.exact, "Exact finite-support route");
  auto* cp_eps = cp_sc->add_option("--epsilon", cp.epsilon, "Sampling accuracy epsilon");
  auto* cp_zeta = cp_sc->add_option("--zeta", cp.zeta, "Sampling failure probability zeta");
  auto* cp_seed = cp_sc->add_option("--seed", cp.seed, "64-bit sampling seed");
  cp_sc->add_option("--sigma", cp.sigma,
                    "Interim allocation JSON sidecar; prices follow its interim caps");
  cp_sc->add_option("--out", cp.out, "Output JSON path (stdout when omitted)");
  cp_sc->callback([&] {
    cp.have_epsilon = cp_eps->count() > 0;
    cp.have_zeta = cp_zeta->count() > 0;
    cp.seeded = cp_seed->count() > 0;
    rc = run_compute_prices(cp);
  });

  SimulateOpts sim;
  auto* sim_sc = app.add_subcommand("simulate", "Seeded posted-price simulation sweep (CSV)");
  sim_sc->add_option("--instance", sim.instance, "Instance JSON path")->required();
  sim_sc->add_option("--prices", sim.prices, "Price JSON path (compute-prices output or array)")
      ->required();
  sim_sc->add_option("--runs", sim.runs, "Number of seeded runs");
  auto* sim_seed = sim_sc->add_option("--seed", sim.seed, "64-bit simulation seed");
  attach_order_policy(sim_sc, sim.policy);
  sim_sc->add_option("--out", sim.out, "Output CSV path (stdout when omitted)");
  sim_sc->callback([&] {
    sim.seeded = sim_seed->count() > 0;
    sim.policy.seed = sim.seed;
    sim.policy.seeded = sim.seeded;
    rc = run_simulate(sim);
  });

  GameValueOpts gv;
  auto* gv_sc = app.add_subcommand("game-value", "Equal-marginals zero-sum game value");
  gv_sc->add_option("--instance", gv.instance, "Instance JSON path")->required();
  gv_sc->add_option("--agent", gv.agent, "Agent index");
  gv_sc->add_option("--atom", gv.atom, "Support atom index");
  gv_sc->add_option("--q", gv.q, "Marginal cap q in [0, 1]")->required();
  gv_sc->add_option("--out", gv.out, "Output JSON path (stdout when omitted)");
  gv_sc->callback([&] { rc = run_game_value(gv); });

  LowerboundOpts lb;
  auto* lb_sc = app.add_subcommand("lowerbound", "Layered lower-bound construction sweep (CSV)");
  lb_sc->add_option("--L", lb.L, "Number of stacked levels (1 or 2)")->required();
  lb_sc->add_option("--q", lb.qs, "Explicit cap values (repeatable)");
  lb_sc->add_flag("--q-sweep", lb.sweep, "Sweep the full cap schedule for this size");
  lb_sc->add_option("--seed", lb.seed, "Seed for the sampled adversary fallback");
  lb_sc->add_option("--samples", lb.samples, "Sample budget for the adversary fallback");
  lb_sc->add_option("--out", lb.out, "Output CSV path (stdout when omitted)");
  lb_sc->callback([&] { rc = run_lowerbound(lb); });

  auto* rev_sc = app.add_subcommand("revenue-sim", "Revenue mechanisms");
  rev_sc->require_subcommand(1);
  RevenueAspeOpts aspe;
  auto* aspe_sc = rev_sc->add_subcommand("aspe", "Anonymous sequential posted prices with fees");
  aspe_sc->add_option("--instance", aspe.instance, "Instance JSON path")->required();
  aspe_sc->add_option("--prices", aspe.prices, "Price JSON path")->required();
  aspe_sc->add_option("--beta", aspe.beta, "Per-agent per-item threshold matrix JSON sidecar");
  aspe_sc->add_option("--out", aspe.out, "Output JSON path (stdout when omitted)");
  aspe_sc->callback([&] { rc = run_revenue_aspe(aspe); });
  RevenueRspmOpts rspm;
  auto* rspm_sc = rev_sc->add_subcommand("rspm", "Sequential personalized posted prices");
  rspm_sc->add_option("--instance", rspm.instance, "Instance JSON path")->required();
  rspm_sc->add_option("--prices", rspm.prices, "Personalized price matrix JSON path")->required();
  rspm_sc->add_option("--out", rspm.out, "Output JSON path (stdout when omitted)");
  rspm_sc->callback([&] { rc = run_revenue_rspm(rspm); });

  VerifyOpts ver;
  auto* ver_sc = app.add_subcommand("verify", "Check mechanism bounds on an instance");
  ver_sc->add_option("--instance", ver.instance, "Instance JSON path")->required();
  ver_sc->add_option("--prices", ver.prices,
                     "Optional price JSON path; omitted recomputes the exact certificate");
  ver_sc->add_option("--tol", ver.tol, "Slack tolerance for bound checks");
  ver_sc->add_flag("--require-guarantee", ver.require_guarantee,
                   "Fail unless supplied prices also meet the schedule welfare guarantee");
  auto* ver_seed = ver_sc->add_option("--seed", ver.policy.seed, "Seed for random-k orders");
  attach_order_policy(ver_sc, ver.policy);
  ver_sc->add_option("--out", ver.out, "Output JSON path (stdout when omitted)");
  ver_sc->callback([&] {
    ver.policy.seeded = ver_seed->count() > 0;
    rc = run_verify(ver);
  });

  PipelineOpts pipe;
  auto* pipe_sc =
      app.add_subcommand("pipeline", "compute-prices, simulate, and verify in one pass");
  pipe_sc->add_option("--instance", pipe.instance, "Instance JSON path")->required();
  pipe_sc->add_option("--out-dir", pipe.out_dir, "Directory for prices.json, runs.csv, summary.json")
      ->required();
  auto* pipe_eps = pipe_sc->add_option("--epsilon", pipe.epsilon, "Sampled route accuracy");
  auto* pipe_zeta = pipe_sc->add_option("--zeta", pipe.zeta, "Sampled route failure probability");
  auto* pipe_seed = pipe_sc->add_option("--seed", pipe.seed, "64-bit seed");
  pipe_sc->add_option("--tol", pipe.tol, "Slack tolerance for bound checks");
  attach_order_policy(pipe_sc, pipe.policy);
  pipe_sc->callback([&] {
    pipe.have_epsilon = pipe_eps->count() > 0;
    pipe.have_zeta = pipe_zeta->count() > 0;
    pipe.seeded = pipe_seed->count() > 0;
    pipe.policy.seed = pipe.seed;
    pipe.policy.seeded = pipe.seeded;
    rc = run_pipeline(pipe);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const subauction::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const subauction::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 2;
  } catch (const subauction::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
