#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socdispatch/cost.hpp"
#include "socdispatch/network.hpp"

namespace socdispatch {

// Enumeration resolution: each power variable is gridded into `steps` equal
// intervals between 0 and its cap (so steps+1 levels including both ends).
struct GridSpec {
  int steps = 4;  // >= 2
};

struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
  // Best schedule found, M x T.
  std::vector<std::vector<double>> gen;
  std::vector<std::vector<double>> charge;
  std::vector<std::vector<double>> discharge;
  // Conservative bound on how far the gridded optimum can sit above the
  // continuous one (Lipschitz constant times step size, summed over
  // decisions).
  double grid_bound = 0.0;
  long long candidates_evaluated = 0;
};

// Literal enumeration of the nonconvex dispatch: per storage and interval
// the choice set is {charge levels} union {discharge levels} (never both),
// generators fill the residual balance cheapest-first on their own grid
// where the network leaves a degree of freedom. Storage cost is evaluated
// with the exact nonconvex trajectory cost. Throws enumeration_limit_error
// when the candidate count would exceed max_candidates.
BruteForceResult brute_force_dispatch(const Case& c, const GridSpec& grid,
                                      long long max_candidates = 10'000'000);

// Deterministic-in-seed feasible trajectory: per interval uniformly picks
// idle/charge/discharge, then a power within caps truncated so the SoC path
// stays inside the operating bounds. Falls back to idle when boxed in.
Trajectory random_feasible_trajectory(const StorageAsset& asset, int horizon,
                                      std::uint64_t seed);

// Random asset generators used by the randomized suites. EDCR assets are
// built with dyadic parameters so the EDCR residuals are exactly zero;
// assumption-only assets draw independent nonincreasing marginals (and may
// or may not satisfy EDCR).
StorageAsset random_edcr_asset(std::uint64_t seed, int max_segments = 5);
StorageAsset random_monotone_asset(std::uint64_t seed, int max_segments = 5);

struct SweepReport {
  int cases = 0;
  double max_rel_deviation = 0.0;
  int argmax_mismatches = 0;
  std::vector<std::uint64_t> failing_seeds;
};

// Randomized equivalence sweep: for `num_cases` random EDCR assets and
// random feasible trajectories (K <= 5, T <= 8), compares the exact
// trajectory cost against the convexified horizon cost and checks that the
// maximizing cut index matches the terminal SoC segment (ties resolved by
// membership). Deterministic in seed.
SweepReport run_theorem1_sweep(int num_cases, std::uint64_t seed);

// Control arm: same sweep over assumption-only (generally non-EDCR) assets,
// evaluating the cut family regardless. Returns the largest absolute
// deviation found and the seed that produced it.
struct DeviationWitness {
  double deviation = 0.0;
  std::uint64_t seed = 0;
};
DeviationWitness find_nonconvexity_witness(int num_samples, std::uint64_t seed);

std::string sweep_report_to_json(const SweepReport& report);

// Random small dispatch case for the exactness suite (M <= 3, T <= 6,
// K <= 3, EDCR bids, nonnegative demands). Deterministic in seed.
Case random_small_case(std::uint64_t seed);

struct ExactnessSuiteReport {
  int cases = 0;
  int optimal = 0;
  int exact = 0;
  int violations = 0;          // failure signal
  int precondition_unmet = 0;  // informational
  int infeasible = 0;
  double min_lmp_seen = 0.0;
  std::vector<std::uint64_t> violation_seeds;
};

// Runs solve_dispatch + check_exactness over `num_cases` random small cases.
ExactnessSuiteReport run_exactness_suite(int num_cases, std::uint64_t seed);

std::string exactness_suite_report_to_json(const ExactnessSuiteReport& report);

}  // namespace socdispatch
