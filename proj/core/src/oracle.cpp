#include "socdispatch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "socdispatch/dispatch.hpp"
#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;
using json = nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 is fully specified by the standard, so every draw below is
// reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double a, double b) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
  }
  int uniform_int(int a, int b) {
    return a + static_cast<int>(gen_() % static_cast<std::uint64_t>(b - a + 1));
  }
  // Dyadic rational in [a, b] with 2^-bits resolution; exactly representable,
  // so sums and small products of these values round to nothing.
  double dyadic(double a, double b, int bits = 10) {
    const double scale = static_cast<double>(1 << bits);
    const long long lo = static_cast<long long>(std::ceil(a * scale));
    const long long hi = static_cast<long long>(std::floor(b * scale));
    if (hi <= lo) return static_cast<double>(lo) / scale;
    const long long pick = lo + static_cast<long long>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    return static_cast<double>(pick) / scale;
  }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace

StorageAsset random_edcr_asset(std::uint64_t seed, int max_segments) {
  Rng rng(seed);
  const int K = rng.uniform_int(1, std::max(1, max_segments));

  BidCurve bid;
  bid.boundaries.resize(K + 1);
  bid.boundaries[0] = rng.dyadic(0.0, 4.0);
  for (int k = 1; k <= K; ++k)
    bid.boundaries[k] = bid.boundaries[k - 1] + rng.dyadic(0.5, 8.0);

  // Discharge marginals: nonincreasing, built from dyadic gaps.
  bid.discharge_costs.resize(K);
  bid.discharge_costs[K - 1] = rng.dyadic(5.0, 30.0);
  for (int k = K - 2; k >= 0; --k)
    bid.discharge_costs[k] = bid.discharge_costs[k + 1] + rng.dyadic(0.0, 8.0);

  // Efficiencies on a 1/256 lattice so eta_c*eta_d is exact.
  const double eta_c = rng.uniform_int(180, 256) / 256.0;
  const double eta_d = rng.uniform_int(180, 256) / 256.0;
  const double ratio = eta_c * eta_d;

  // Charge marginals derive from the discharge gaps through the EDCR
  // equalities; with dyadic inputs every residual is an exact zero. The
  // leading marginal sits strictly below the spread limit.
  bid.charge_benefits.resize(K);
  const double fraction = rng.uniform_int(64, 230) / 256.0;
  bid.charge_benefits[0] = fraction * (ratio * bid.discharge_costs[K - 1]);
  for (int k = 1; k < K; ++k)
    bid.charge_benefits[k] =
        bid.charge_benefits[k - 1] -
        ratio * (bid.discharge_costs[k - 1] - bid.discharge_costs[k]);

  StorageAsset asset = make_asset(std::move(bid), eta_c, eta_d, 0.0, 0.0, 0.0);
  const double span = asset.bid.boundaries.back() - asset.bid.boundaries.front();
  asset.p_charge_max = rng.dyadic(0.25, std::max(0.5, span * 0.75));
  asset.p_discharge_max = rng.dyadic(0.25, std::max(0.5, span * 0.75));
  if (rng.chance(0.25)) {
    // Occasionally operate strictly inside the partition range.
    const double lo_pad = rng.dyadic(0.0, span / 8.0);
    const double hi_pad = rng.dyadic(0.0, span / 8.0);
    asset.soc_min = asset.bid.boundaries.front() + lo_pad;
    asset.soc_max = asset.bid.boundaries.back() - hi_pad;
  }
  asset.initial_soc = rng.dyadic(asset.soc_min, asset.soc_max);
  return asset;
}

StorageAsset random_monotone_asset(std::uint64_t seed, int max_segments) {
  Rng rng(seed);
  const int K = rng.uniform_int(1, std::max(1, max_segments));

  BidCurve bid;
  bid.boundaries.resize(K + 1);
  bid.boundaries[0] = rng.dyadic(0.0, 4.0);
  for (int k = 1; k <= K; ++k)
    bid.boundaries[k] = bid.boundaries[k - 1] + rng.dyadic(0.5, 8.0);

  bid.discharge_costs.resize(K);
  bid.discharge_costs[K - 1] = rng.dyadic(5.0, 30.0);
  for (int k = K - 2; k >= 0; --k)
    bid.discharge_costs[k] = bid.discharge_costs[k + 1] + rng.dyadic(0.25, 8.0);

  const double eta_c = rng.uniform_int(180, 256) / 256.0;
  const double eta_d = rng.uniform_int(180, 256) / 256.0;

  // Independent nonincreasing charge marginals under the same spread limit;
  // nothing ties the decrements together here.
  bid.charge_benefits.resize(K);
  const double fraction = rng.uniform_int(64, 230) / 256.0;
  bid.charge_benefits[0] = fraction * (eta_c * eta_d * bid.discharge_costs[K - 1]);
  for (int k = 1; k < K; ++k)
    bid.charge_benefits[k] = bid.charge_benefits[k - 1] - rng.dyadic(0.25, 6.0);

  StorageAsset asset = make_asset(std::move(bid), eta_c, eta_d, 0.0, 0.0, 0.0);
  const double span = asset.bid.boundaries.back() - asset.bid.boundaries.front();
  asset.p_charge_max = rng.dyadic(0.25, std::max(0.5, span * 0.75));
  asset.p_discharge_max = rng.dyadic(0.25, std::max(0.5, span * 0.75));
  asset.initial_soc = rng.dyadic(asset.soc_min, asset.soc_max);
  return asset;
}

Trajectory random_feasible_trajectory(const StorageAsset& asset, int horizon,
                                      std::uint64_t seed) {
  Rng rng(seed);
  Trajectory traj;
  traj.initial_soc = asset.initial_soc;
  traj.charge.assign(horizon, 0.0);
  traj.discharge.assign(horizon, 0.0);
  double e = asset.initial_soc;
  for (int t = 0; t < horizon; ++t) {
    const int action = rng.uniform_int(0, 2);
    if (action == 1) {
      const double room = (asset.soc_max - e) / asset.eta_c;
      const double cap = std::min(asset.p_charge_max, room);
      if (cap > 0.0) traj.charge[t] = rng.uniform(0.0, cap);
    } else if (action == 2) {
      const double room = (e - asset.soc_min) * asset.eta_d;
      const double cap = std::min(asset.p_discharge_max, room);
      if (cap > 0.0) traj.discharge[t] = rng.uniform(0.0, cap);
    }
    e = e + traj.charge[t] * asset.eta_c - traj.discharge[t] / asset.eta_d;
  }
  return traj;
}

SweepReport run_theorem1_sweep(int num_cases, std::uint64_t seed) {
  SweepReport report;
  report.cases = num_cases;
  for (int i = 0; i < num_cases; ++i) {
    const std::uint64_t case_seed = mix_seed(seed, i);
    const StorageAsset asset = random_edcr_asset(case_seed);
    Rng rng(mix_seed(case_seed, 1));
    const int T = rng.uniform_int(1, 8);
    const Trajectory traj = random_feasible_trajectory(asset, T, mix_seed(case_seed, 2));

    const TrajectoryCost tc = trajectory_cost(traj, asset);
    double total_charge = 0.0, total_discharge = 0.0;
    for (double v : traj.charge) total_charge += v;
    for (double v : traj.discharge) total_discharge += v;
    const ConvexCost cc =
        convex_horizon_cost(total_charge, total_discharge, traj.initial_soc, asset);

    const double rel =
        std::abs(tc.total - cc.value) / std::max(1.0, std::abs(tc.total));
    bool failed = false;
    if (rel > report.max_rel_deviation) report.max_rel_deviation = rel;
    if (rel > 1e-9) failed = true;

    // The maximizing cut must agree with the terminal SoC segment; on ties
    // the terminal segment only has to attain the max.
    const double lo = asset.bid.boundaries.front();
    const double hi = asset.bid.boundaries.back();
    const double terminal = std::min(std::max(tc.soc_path.back(), lo), hi);
    const int n = segment_index(terminal, asset.bid);
    const CostCuts cuts = epigraph_cuts(traj.initial_soc, asset);
    double vmax = -kInf;
    for (int j = 1; j <= cuts.size(); ++j)
      vmax = std::max(vmax, cuts.value(j, total_charge, total_discharge));
    const double tie_tol = 1e-9 * (1.0 + std::abs(vmax));
    int attaining = 0;
    for (int j = 1; j <= cuts.size(); ++j)
      if (cuts.value(j, total_charge, total_discharge) >= vmax - tie_tol) ++attaining;
    const bool n_attains =
        cuts.value(n, total_charge, total_discharge) >= vmax - tie_tol;
    if (!n_attains || (attaining == 1 && cc.argmax_index != n)) {
      ++report.argmax_mismatches;
      failed = true;
    }

    if (failed) report.failing_seeds.push_back(case_seed);
  }
  return report;
}

DeviationWitness find_nonconvexity_witness(int num_samples, std::uint64_t seed) {
  DeviationWitness best;
  for (int i = 0; i < num_samples; ++i) {
    const std::uint64_t case_seed = mix_seed(seed ^ 0x5bd1e995ULL, i);
    const StorageAsset asset = random_monotone_asset(case_seed);
    Rng rng(mix_seed(case_seed, 1));
    const int T = rng.uniform_int(2, 8);
    const Trajectory traj = random_feasible_trajectory(asset, T, mix_seed(case_seed, 2));

    const TrajectoryCost tc = trajectory_cost(traj, asset);
    double total_charge = 0.0, total_discharge = 0.0;
    for (double v : traj.charge) total_charge += v;
    for (double v : traj.discharge) total_discharge += v;

    // Evaluate the cut family directly; it is only a valid reformulation
    // under the EDCR condition, which these assets generally break.
    double vmax = -kInf;
    for (int j = 1; j <= asset.bid.num_segments(); ++j) {
      const double v = cut_intercept(j, traj.initial_soc, asset) -
                       asset.bid.charge_benefits[j - 1] * total_charge +
                       asset.bid.discharge_costs[j - 1] * total_discharge;
      vmax = std::max(vmax, v);
    }
    const double dev = std::abs(tc.total - vmax);
    if (dev > best.deviation) {
      best.deviation = dev;
      best.seed = case_seed;
    }
  }
  return best;
}

std::string sweep_report_to_json(const SweepReport& report) {
  json j;
  j["cases"] = report.cases;
  j["max_rel_deviation"] = report.max_rel_deviation;
  j["argmax_mismatches"] = report.argmax_mismatches;
  j["failing_seeds"] = report.failing_seeds;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Brute-force dispatch
// ---------------------------------------------------------------------------

namespace {

constexpr double kTol = 1e-9;

struct GenMeritBlock {
  int bus;
  double capacity;
  double cost;
};

struct Enumerator {
  const Case& c;
  const GridSpec& grid;
  long long max_candidates;

  std::vector<int> storage_buses;
  std::vector<const StorageAsset*> assets;
  std::vector<std::vector<std::pair<double, double>>> options;  // per storage
  std::vector<int> gen_buses;
  std::vector<GenMeritBlock> merit;  // all blocks sorted by cost for B=0
  long long evaluated = 0;

  // Current assignment during the search.
  std::vector<std::vector<double>> charge, discharge;  // per storage, per t
  std::vector<double> soc;                             // per storage
  std::vector<std::vector<double>> gen_out;            // per t, per gen bus

  bool found = false;
  double best_cost = kInf;
  std::vector<std::vector<double>> best_charge, best_discharge, best_gen;

  Enumerator(const Case& cc, const GridSpec& g, long long cap)
      : c(cc), grid(g), max_candidates(cap) {
    for (const auto& [bus, asset] : c.storages) {
      storage_buses.push_back(bus);
      assets.push_back(&asset);
      std::vector<std::pair<double, double>> opts;
      opts.emplace_back(0.0, 0.0);
      for (int l = 1; l <= grid.steps; ++l) {
        const double gc = asset.p_charge_max * l / grid.steps;
        if (gc > 0.0) opts.emplace_back(gc, 0.0);
      }
      for (int l = 1; l <= grid.steps; ++l) {
        const double gd = asset.p_discharge_max * l / grid.steps;
        if (gd > 0.0) opts.emplace_back(0.0, gd);
      }
      options.push_back(std::move(opts));
    }
    for (const auto& [bus, gen] : c.generators) {
      gen_buses.push_back(bus);
      for (const auto& b : gen.blocks) merit.push_back({bus, b.capacity, b.cost});
    }
    std::stable_sort(merit.begin(), merit.end(),
                     [](const GenMeritBlock& a, const GenMeritBlock& b) {
                       return a.cost < b.cost;
                     });

    const int n_storage = static_cast<int>(storage_buses.size());
    charge.assign(n_storage, std::vector<double>(c.horizon, 0.0));
    discharge.assign(n_storage, std::vector<double>(c.horizon, 0.0));
    soc.resize(n_storage);
    for (int s = 0; s < n_storage; ++s) soc[s] = assets[s]->initial_soc;
    gen_out.assign(c.horizon, std::vector<double>(gen_buses.size(), 0.0));
  }

  // Estimated number of cost evaluations, used to enforce the size cap
  // before starting.
  double estimate() const {
    double joint = 1.0;
    for (const auto& opts : options) joint *= static_cast<double>(opts.size());
    double gen_combos = 1.0;
    if (!c.network.branch_limits.empty() && gen_buses.size() > 1)
      for (size_t g = 0; g + 1 < gen_buses.size(); ++g)
        gen_combos *= static_cast<double>(grid.steps + 1);
    double per_interval = std::pow(joint, c.horizon);
    return per_interval * gen_combos * std::max(1, c.horizon);
  }

  // Cheapest generation serving per-bus net withdrawal w for one interval;
  // returns infinity when infeasible. Fills `out` per generator bus.
  double generation_cost(const std::vector<double>& w, std::vector<double>& out) {
    double total_w = 0.0;
    for (double v : w) total_w += v;
    out.assign(gen_buses.size(), 0.0);

    if (c.network.branch_limits.empty()) {
      ++evaluated;
      if (gen_buses.empty()) return std::abs(total_w) <= kTol ? 0.0 : kInf;
      if (total_w < -kTol) return kInf;  // generation cannot absorb energy
      double remaining = std::max(total_w, 0.0);
      double cost = 0.0;
      for (const auto& b : merit) {
        const double take = std::min(remaining, b.capacity);
        cost += take * b.cost;
        const auto it = std::find(gen_buses.begin(), gen_buses.end(), b.bus);
        out[it - gen_buses.begin()] += take;
        remaining -= take;
        if (remaining <= 0.0) break;
      }
      return remaining > kTol ? kInf : cost;
    }

    // Network-constrained: grid every generator but the last, which picks up
    // the residual; branch rows checked on bus injections.
    const int n_gen = static_cast<int>(gen_buses.size());
    if (n_gen == 0) {
      ++evaluated;
      if (std::abs(total_w) > kTol) return kInf;
      return branch_feasible(w, out) ? 0.0 : kInf;
    }
    std::vector<double> levels_idx(std::max(0, n_gen - 1), 0.0);
    std::vector<int> idx(std::max(0, n_gen - 1), 0);
    double best = kInf;
    std::vector<double> trial(n_gen, 0.0), best_trial;
    while (true) {
      ++evaluated;
      double sum = 0.0;
      for (int g = 0; g + 1 < n_gen; ++g) {
        const Generator& gen = c.generators.at(gen_buses[g]);
        trial[g] = gen.total_capacity() * idx[g] / grid.steps;
        sum += trial[g];
      }
      const double last = total_w - sum;
      const Generator& last_gen = c.generators.at(gen_buses[n_gen - 1]);
      if (last >= -kTol && last <= last_gen.total_capacity() + kTol) {
        trial[n_gen - 1] = std::min(std::max(last, 0.0), last_gen.total_capacity());
        if (branch_feasible(w, trial)) {
          double cost = 0.0;
          for (int g = 0; g < n_gen; ++g)
            cost += c.generators.at(gen_buses[g]).production_cost(trial[g]);
          if (cost < best) {
            best = cost;
            best_trial = trial;
          }
        }
      }
      // odometer
      int g = 0;
      for (; g < n_gen - 1; ++g) {
        if (++idx[g] <= grid.steps) break;
        idx[g] = 0;
      }
      if (n_gen == 1 || g == n_gen - 1) break;
    }
    if (best < kInf) out = best_trial;
    return best;
  }

  bool branch_feasible(const std::vector<double>& w,
                       const std::vector<double>& gen_levels) const {
    const auto& S = c.network.shift_factors;
    const int M = c.network.num_buses;
    std::vector<double> injection(M, 0.0);
    for (int i = 0; i < M; ++i) injection[i] = -w[i];
    for (size_t g = 0; g < gen_buses.size(); ++g) injection[gen_buses[g]] += gen_levels[g];
    for (size_t r = 0; r < S.size(); ++r) {
      double flow = 0.0;
      for (int i = 0; i < M; ++i) flow += S[r][i] * injection[i];
      if (flow > c.network.branch_limits[r] + kTol) return false;
    }
    return true;
  }

  void search(int t, double cost_so_far) {
    if (t == c.horizon) {
      if (cost_so_far < best_cost - 1e-12) {
        best_cost = cost_so_far;
        found = true;
        best_charge = charge;
        best_discharge = discharge;
        best_gen = gen_out;
      }
      return;
    }
    assign_storage(t, 0, cost_so_far);
  }

  void assign_storage(int t, int s, double stage_cost_sum) {
    const int n_storage = static_cast<int>(storage_buses.size());
    if (s == n_storage) {
      const int M = c.network.num_buses;
      std::vector<double> w(M, 0.0);
      for (int i = 0; i < M; ++i) w[i] = c.demand[i][t];
      for (int k = 0; k < n_storage; ++k)
        w[storage_buses[k]] += charge[k][t] - discharge[k][t];
      std::vector<double> out;
      const double gen_cost = generation_cost(w, out);
      if (gen_cost == kInf) return;
      gen_out[t] = out;
      search(t + 1, stage_cost_sum + gen_cost);
      return;
    }

    const StorageAsset& asset = *assets[s];
    const double saved = soc[s];
    for (const auto& [gc, gd] : options[s]) {
      const double next = saved + gc * asset.eta_c - gd / asset.eta_d;
      if (next < asset.soc_min - kTol || next > asset.soc_max + kTol) continue;
      charge[s][t] = gc;
      discharge[s][t] = gd;
      soc[s] = next;
      const double f = stage_cost(saved, gc, gd, asset);
      assign_storage(t, s + 1, stage_cost_sum + f);
    }
    charge[s][t] = 0.0;
    discharge[s][t] = 0.0;
    soc[s] = saved;
  }
};

}  // namespace

BruteForceResult brute_force_dispatch(const Case& c, const GridSpec& grid,
                                      long long max_candidates) {
  if (grid.steps < 2) throw input_error("grid steps must be >= 2");
  ValidationReport report = validate_case(c);
  if (!report.ok())
    throw input_error("brute_force_dispatch: invalid case: " + report.violations.front());

  Enumerator e(c, grid, max_candidates);
  const double est = e.estimate();
  if (est > static_cast<double>(max_candidates))
    throw enumeration_limit_error("brute_force_dispatch: ~" + fmt(est) +
                                  " candidate evaluations exceed the cap of " +
                                  std::to_string(max_candidates));

  e.search(0, 0.0);

  BruteForceResult out;
  out.candidates_evaluated = e.evaluated;
  out.feasible = e.found;
  const int M = c.network.num_buses;
  const int T = c.horizon;
  out.gen.assign(M, std::vector<double>(T, 0.0));
  out.charge.assign(M, std::vector<double>(T, 0.0));
  out.discharge.assign(M, std::vector<double>(T, 0.0));
  if (!e.found) return out;

  for (size_t s = 0; s < e.storage_buses.size(); ++s)
    for (int t = 0; t < T; ++t) {
      out.charge[e.storage_buses[s]][t] = e.best_charge[s][t];
      out.discharge[e.storage_buses[s]][t] = e.best_discharge[s][t];
    }
  for (int t = 0; t < T; ++t)
    for (size_t g = 0; g < e.gen_buses.size(); ++g)
      out.gen[e.gen_buses[g]][t] = e.best_gen[t][g];

  // Reported objective: exact trajectory cost per storage plus generation.
  double objective = 0.0;
  for (size_t s = 0; s < e.storage_buses.size(); ++s) {
    Trajectory traj;
    traj.initial_soc = e.assets[s]->initial_soc;
    traj.charge = e.best_charge[s];
    traj.discharge = e.best_discharge[s];
    objective += trajectory_cost(traj, *e.assets[s]).total;
  }
  for (int t = 0; t < T; ++t)
    for (size_t g = 0; g < e.gen_buses.size(); ++g)
      objective += c.generators.at(e.gen_buses[g]).production_cost(e.best_gen[t][g]);
  out.objective = objective;

  // Conservative resolution bound: one grid step per decision, priced at the
  // steepest storage marginal plus the costliest generator block. Gridded
  // generators (all but the residual one, used only when branch rows exist)
  // contribute their own step times a two-sided rebalancing cost.
  double max_gen_cost = 0.0;
  for (const auto& [bus, gen] : c.generators)
    for (const auto& b : gen.blocks) max_gen_cost = std::max(max_gen_cost, b.cost);
  double bound = 0.0;
  for (size_t s = 0; s < e.storage_buses.size(); ++s) {
    const StorageAsset& a = *e.assets[s];
    const double step_c = a.p_charge_max / grid.steps;
    const double step_d = a.p_discharge_max / grid.steps;
    const double cc = std::abs(a.bid.charge_benefits.front());
    const double cd = std::abs(a.bid.discharge_costs.front());
    bound += T * (step_c * (cc + max_gen_cost) + step_d * (cd + max_gen_cost));
  }
  if (!c.network.branch_limits.empty() && e.gen_buses.size() > 1)
    for (size_t g = 0; g + 1 < e.gen_buses.size(); ++g) {
      const double step = c.generators.at(e.gen_buses[g]).total_capacity() / grid.steps;
      bound += T * step * 2.0 * max_gen_cost;
    }
  out.grid_bound = bound;
  return out;
}

// ---------------------------------------------------------------------------
// Randomized dispatch cases and the exactness suite
// ---------------------------------------------------------------------------

Case random_small_case(std::uint64_t seed) {
  Rng rng(seed);
  Case c;
  const int M = rng.uniform_int(1, 3);
  const int T = rng.uniform_int(1, 6);
  c.network.num_buses = M;
  c.horizon = T;

  c.demand.assign(M, std::vector<double>(T, 0.0));
  for (int i = 0; i < M; ++i)
    for (int t = 0; t < T; ++t) c.demand[i][t] = rng.dyadic(0.0, 8.0);

  for (int i = 0; i < M; ++i) {
    if (i != 0 && !rng.chance(0.8)) continue;
    Generator gen;
    const int blocks = rng.uniform_int(1, 3);
    double cost = rng.dyadic(1.0, 15.0);
    for (int b = 0; b < blocks; ++b) {
      gen.blocks.push_back({rng.dyadic(2.0, 10.0), cost});
      cost += rng.dyadic(0.0, 10.0);
    }
    c.generators[i] = std::move(gen);
  }

  // Keep the fleet big enough to cover peak demand on its own.
  double peak = 0.0;
  for (int t = 0; t < T; ++t) {
    double total = 0.0;
    for (int i = 0; i < M; ++i) total += c.demand[i][t];
    peak = std::max(peak, total);
  }
  double fleet = 0.0;
  for (const auto& [bus, gen] : c.generators) fleet += gen.total_capacity();
  if (fleet < peak + 4.0) {
    Generator& g0 = c.generators[0];
    const double topup = peak + 8.0 - fleet;
    const double top_cost =
        g0.blocks.empty() ? rng.dyadic(10.0, 30.0) : g0.blocks.back().cost + rng.dyadic(1.0, 10.0);
    g0.blocks.push_back({topup, top_cost});
  }

  for (int i = 0; i < M; ++i)
    if (rng.chance(0.6)) {
      StorageAsset asset = random_edcr_asset(mix_seed(seed, 100 + i), 3);
      c.storages[i] = std::move(asset);
    }

  const int branches = M > 1 ? rng.uniform_int(0, 2) : 0;
  for (int b = 0; b < branches; ++b) {
    std::vector<double> row(M, 0.0);
    for (int i = 0; i < M; ++i) row[i] = rng.dyadic(-1.0, 1.0, 4);
    const double limit = rng.dyadic(2.0, 15.0);
    std::vector<double> neg(M, 0.0);
    for (int i = 0; i < M; ++i) neg[i] = -row[i];
    c.network.shift_factors.push_back(std::move(row));
    c.network.branch_limits.push_back(limit);
    c.network.shift_factors.push_back(std::move(neg));
    c.network.branch_limits.push_back(limit);
  }
  return c;
}

ExactnessSuiteReport run_exactness_suite(int num_cases, std::uint64_t seed) {
  ExactnessSuiteReport report;
  report.cases = num_cases;
  report.min_lmp_seen = kInf;
  for (int i = 0; i < num_cases; ++i) {
    const std::uint64_t case_seed = mix_seed(seed ^ 0x2545f491ULL, i);
    const Case c = random_small_case(case_seed);
    const DispatchResult result = solve_dispatch(c);
    if (result.status != LpStatus::optimal) {
      ++report.infeasible;
      continue;
    }
    ++report.optimal;
    report.min_lmp_seen = std::min(report.min_lmp_seen, result.exactness.min_lmp);
    switch (result.exactness.verdict) {
      case ExactnessVerdict::exact: ++report.exact; break;
      case ExactnessVerdict::violation:
        ++report.violations;
        report.violation_seeds.push_back(case_seed);
        break;
      case ExactnessVerdict::precondition_unmet: ++report.precondition_unmet; break;
    }
  }
  if (!std::isfinite(report.min_lmp_seen)) report.min_lmp_seen = 0.0;
  return report;
}

std::string exactness_suite_report_to_json(const ExactnessSuiteReport& report) {
  json j;
  j["cases"] = report.cases;
  j["optimal"] = report.optimal;
  j["exact"] = report.exact;
  j["violations"] = report.violations;
  j["precondition_unmet"] = report.precondition_unmet;
  j["infeasible"] = report.infeasible;
  j["min_lmp_seen"] = report.min_lmp_seen;
  j["violation_seeds"] = report.violation_seeds;
  return j.dump(2);
}

}  // namespace socdispatch
