#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "socdispatch/lp.hpp"
#include "socdispatch/network.hpp"

namespace socdispatch {

struct DispatchOptions {
  double edcr_tol = 1e-9;       // bid admission tolerance
  double exactness_tol = 1e-7;  // simultaneous charge/discharge threshold
  SimplexOptions lp;
};

enum class ExactnessVerdict {
  exact,              // no simultaneous charge/discharge anywhere
  violation,          // simultaneous dispatch despite nonnegative LMPs (failure signal)
  precondition_unmet  // simultaneous dispatch with some negative LMP (informational)
};

const char* to_string(ExactnessVerdict v);

struct ExactnessReport {
  double min_lmp = 0.0;
  std::vector<std::pair<int, int>> simultaneous;  // 0-based (bus, t)
  ExactnessVerdict verdict = ExactnessVerdict::exact;
};

// Variable and row positions of the dispatch LP, for dual extraction and
// tests. All indices 0-based.
struct DispatchIndexMap {
  std::map<std::pair<int, int>, std::vector<int>> gen_block_vars;  // (bus,t) -> block vars
  std::map<std::pair<int, int>, int> charge_var;                   // (bus,t)
  std::map<std::pair<int, int>, int> discharge_var;                // (bus,t)
  std::map<std::pair<int, int>, int> soc_var;        // (bus,t) -> e_{bus,t+1}
  std::map<int, int> theta_var;                      // bus -> epigraph variable
  std::vector<int> balance_row;                      // per t, eq row
  std::map<std::pair<int, int>, int> soc_row;        // (bus,t) -> eq row
  std::vector<std::vector<int>> branch_row;          // per t, per branch row -> ineq row
  std::map<std::pair<int, int>, int> cut_row;        // (bus,j) -> ineq row, j 1-based
};

struct DispatchLp {
  LinearProgram lp;
  DispatchIndexMap index;
};

// Relaxed convexified dispatch LP: per-interval system balance and branch
// rows, SoC transition equalities, variable bounds, and one epigraph
// variable per storage bounded below by its bid's cuts in the horizon
// totals. The complementarity product is never added; exactness is checked
// after solving. Requires every storage bid to satisfy the EDCR condition
// (throws input_error pointing at fit-bid otherwise) and the case to be
// valid.
DispatchLp build_dispatch_lp(const Case& c, const DispatchOptions& options = {});

// Full market-clearing result. Matrices are M x T (zero rows for absent
// units); SoC paths, transition duals and epigraph values exist for storage
// buses only.
struct DispatchResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<std::vector<double>> gen;        // g^G
  std::vector<std::vector<double>> charge;     // g^C
  std::vector<std::vector<double>> discharge;  // g^D
  std::map<int, std::vector<double>> soc;      // per storage bus, length T+1
  std::map<int, double> theta;                 // epigraph value per storage bus
  double objective = 0.0;
  std::vector<double> lambda;                  // per t, d(cost)/d(total demand in t)
  std::vector<std::vector<double>> mu;         // per t, one value per branch row, >= 0
  std::map<int, std::vector<double>> phi;      // SoC transition duals, per storage bus per t
  std::vector<std::vector<double>> lmp;        // M x T
  ExactnessReport exactness;
  LpSolution raw;                              // bound duals etc. live here
};

// Builds, solves and unpacks the dispatch LP. Infeasible cases come back
// with status infeasible and empty schedules.
DispatchResult solve_dispatch(const Case& c, const DispatchOptions& options = {});

// lmp[i][t] = lambda[t] - sum_r shift_factors[r][i] * mu[t][r]. Pure
// arithmetic, no thresholding.
std::vector<std::vector<double>> compute_lmps(
    const std::vector<double>& lambda, const std::vector<std::vector<double>>& mu,
    const std::vector<std::vector<double>>& shift_factors, int num_buses);

// Classifies an optimal result: EXACT when no (bus,t) charges and discharges
// simultaneously above tol; otherwise VIOLATION if all LMPs are nonnegative
// (within tol) and PRECONDITION-UNMET if some LMP is negative.
ExactnessReport check_exactness(const DispatchResult& result, double tol = 1e-7);

// Result JSON plus the two CSV emitters (headers "bus,t,gG,gC,gD,soc" and
// "bus,t,pi"; 1-based indices in files).
std::string result_to_json(const DispatchResult& result);
std::string schedule_csv(const DispatchResult& result);
std::string lmp_csv(const DispatchResult& result);

}  // namespace socdispatch
