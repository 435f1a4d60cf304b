#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "socdispatch/cost.hpp"
#include "socdispatch/dispatch.hpp"
#include "socdispatch/errors.hpp"
#include "socdispatch/oracle.hpp"

using namespace socdispatch;

namespace {

StorageAsset flat_storage(double charge_benefit, double discharge_cost, double cap,
                          double soc_max, double initial) {
  BidCurve bid;
  bid.boundaries = {0.0, soc_max};
  bid.charge_benefits = {charge_benefit};
  bid.discharge_costs = {discharge_cost};
  return make_asset(bid, 1.0, 1.0, cap, cap, initial);
}

// Single bus, one interval, demand 5: generation is cheaper than any storage
// move, so the battery idles.
Case idle_case() {
  Case c;
  c.network.num_buses = 1;
  c.horizon = 1;
  c.demand = {{5.0}};
  c.generators[0].blocks = {{10.0, 5.0}};
  c.storages[0] = flat_storage(2.0, 50.0, 10.0, 10.0, 0.0);
  return c;
}

// Single bus, two intervals, demand (0, 10), generator cap 8: the second
// interval clears only if the battery charges in the first.
Case arbitrage_case() {
  Case c;
  c.network.num_buses = 1;
  c.horizon = 2;
  c.demand = {{0.0, 10.0}};
  c.generators[0].blocks = {{8.0, 5.0}};
  c.storages[0] = flat_storage(1.0, 2.0, 10.0, 10.0, 0.0);
  return c;
}

Case two_bus_case() {
  Case c;
  c.network.num_buses = 2;
  c.horizon = 2;
  c.demand = {{1.0, 2.0}, {3.0, 4.0}};
  c.generators[0].blocks = {{20.0, 5.0}};
  c.generators[1].blocks = {{20.0, 7.0}};
  BidCurve bid;
  bid.boundaries = {0.0, 2.0, 4.0};
  bid.charge_benefits = {10.0, 6.0};
  bid.discharge_costs = {20.0, 16.0};
  c.storages[0] = make_asset(bid, 1.0, 1.0, 5.0, 5.0, 1.0);
  c.network.shift_factors = {{0.5, -0.5}, {-0.5, 0.5}};
  c.network.branch_limits = {10.0, 10.0};
  return c;
}

}  // namespace

TEST_CASE("LP construction: degenerate single-bus count") {
  Case c = idle_case();
  const DispatchLp built = build_dispatch_lp(c);
  CHECK(built.lp.num_eq() == 2);    // 1 balance + 1 SoC row
  CHECK(built.lp.num_ineq() == 1);  // 1 cut
  CHECK(built.index.balance_row.size() == 1);
  CHECK(built.index.soc_row.size() == 1);
  CHECK(built.index.cut_row.size() == 1);
  // variables: 1 gen block + gC + gD + e + theta
  CHECK(built.lp.num_vars == 5);
}

TEST_CASE("LP construction: two-bus, one-line, K=2 count") {
  const Case c = two_bus_case();
  const DispatchLp built = build_dispatch_lp(c);
  CHECK(built.index.balance_row.size() == 2);
  CHECK(built.lp.num_eq() == 2 + 2);  // balances + SoC rows
  int branch_rows = 0;
  for (const auto& rows : built.index.branch_row) branch_rows += rows.size();
  CHECK(branch_rows == 4);
  CHECK(built.index.cut_row.size() == 2);
  CHECK(built.lp.num_ineq() == 4 + 2);
}

TEST_CASE("non-EDCR bids are rejected with a pointer to fit-bid") {
  Case c = idle_case();
  BidCurve bid;
  bid.boundaries = {0.0, 2.0, 4.0};
  bid.charge_benefits = {10.0, 6.0};
  bid.discharge_costs = {21.0, 15.0};
  c.storages[0] = make_asset(bid, 1.0, 1.0, 5.0, 5.0, 1.0);
  CHECK_THROWS_WITH_AS(build_dispatch_lp(c), doctest::Contains("fit-bid"), input_error);
}

TEST_CASE("invalid cases are rejected at build time") {
  Case c = idle_case();
  c.demand[0][0] = -1.0;
  CHECK_THROWS_AS(build_dispatch_lp(c), input_error);
}

TEST_CASE("idle-storage dispatch reproduces the hand-derived optimum") {
  const DispatchResult result = solve_dispatch(idle_case());
  REQUIRE(result.status == LpStatus::optimal);
  CHECK(result.objective == doctest::Approx(25.0));
  CHECK(result.gen[0][0] == doctest::Approx(5.0));
  CHECK(result.charge[0][0] == doctest::Approx(0.0));
  CHECK(result.discharge[0][0] == doctest::Approx(0.0));
  CHECK(result.lambda[0] == doctest::Approx(5.0));
  CHECK(result.lmp[0][0] == doctest::Approx(5.0));
  CHECK(result.exactness.verdict == ExactnessVerdict::exact);
}

TEST_CASE("arbitrage dispatch reproduces schedule, objective and prices") {
  const DispatchResult result = solve_dispatch(arbitrage_case());
  REQUIRE(result.status == LpStatus::optimal);
  CHECK(result.objective == doctest::Approx(52.0));
  CHECK(result.charge[0][0] == doctest::Approx(2.0));
  CHECK(result.discharge[0][1] == doctest::Approx(2.0));
  CHECK(result.gen[0][0] == doctest::Approx(2.0));
  CHECK(result.gen[0][1] == doctest::Approx(8.0));
  CHECK(result.lambda[0] == doctest::Approx(5.0));
  CHECK(result.lambda[1] == doctest::Approx(6.0));
  CHECK(result.lmp[0][0] == doctest::Approx(5.0));
  CHECK(result.lmp[0][1] == doctest::Approx(6.0));
  const auto& path = result.soc.at(0);
  CHECK(path[0] == doctest::Approx(0.0));
  CHECK(path[1] == doctest::Approx(2.0));
  CHECK(path[2] == doctest::Approx(0.0));
  CHECK(result.exactness.verdict == ExactnessVerdict::exact);
}

TEST_CASE("demand beyond deliverable energy is infeasible") {
  Case c = idle_case();
  c.demand[0][0] = 100.0;
  c.storages.clear();
  const DispatchResult result = solve_dispatch(c);
  CHECK(result.status == LpStatus::infeasible);
}

TEST_CASE("compute_lmps applies the shift-factor correction") {
  // No congestion term.
  auto pi = compute_lmps({5.0, 6.0}, {{}, {}}, {}, 2);
  CHECK(pi[0][0] == 5.0);
  CHECK(pi[1][1] == 6.0);

  // One binding row with factor 0.5 at bus 0.
  pi = compute_lmps({5.0}, {{1.0, 0.0}}, {{0.5, -0.5}, {-0.5, 0.5}}, 2);
  CHECK(pi[0][0] == doctest::Approx(4.5));
  CHECK(pi[1][0] == doctest::Approx(5.5));

  // All-zero duals give a uniform price.
  pi = compute_lmps({7.0}, {{0.0, 0.0}}, {{0.5, -0.5}, {-0.5, 0.5}}, 2);
  CHECK(pi[0][0] == 7.0);
  CHECK(pi[1][0] == 7.0);
}

TEST_CASE("check_exactness classifies constructed results") {
  DispatchResult r;
  r.charge = {{1.0, 0.0}};
  r.discharge = {{0.0, 1.0}};
  r.lmp = {{5.0, 6.0}};
  CHECK(check_exactness(r).verdict == ExactnessVerdict::exact);

  r.charge = {{1.0, 0.0}};
  r.discharge = {{1.0, 0.0}};
  CHECK(check_exactness(r).verdict == ExactnessVerdict::violation);
  CHECK(check_exactness(r).simultaneous.size() == 1);

  r.lmp = {{-0.5, 6.0}};
  CHECK(check_exactness(r).verdict == ExactnessVerdict::precondition_unmet);
  CHECK(check_exactness(r).min_lmp == doctest::Approx(-0.5));
}

TEST_CASE("solved results satisfy balance, SoC recursion and epigraph tightness") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Case c = random_small_case(seed);
    const DispatchResult result = solve_dispatch(c);
    if (result.status != LpStatus::optimal) continue;
    const int M = c.network.num_buses;
    const int T = c.horizon;

    for (int t = 0; t < T; ++t) {
      double injection = 0.0, demand = 0.0;
      for (int i = 0; i < M; ++i) {
        injection += result.gen[i][t] + result.discharge[i][t] - result.charge[i][t];
        demand += c.demand[i][t];
      }
      CHECK(std::abs(injection - demand) <= 1e-7);
    }

    for (const auto& [bus, asset] : c.storages) {
      const auto& path = result.soc.at(bus);
      for (int t = 0; t < T; ++t) {
        const double expected = path[t] + result.charge[bus][t] * asset.eta_c -
                                result.discharge[bus][t] / asset.eta_d;
        CHECK(std::abs(path[t + 1] - expected) <= 1e-9);
      }
      // theta dominates every cut and meets the best one.
      const CostCuts cuts = epigraph_cuts(asset.initial_soc, asset);
      double total_charge = 0.0, total_discharge = 0.0;
      for (int t = 0; t < T; ++t) {
        total_charge += result.charge[bus][t];
        total_discharge += result.discharge[bus][t];
      }
      double best = -kInf;
      for (int j = 1; j <= cuts.size(); ++j) {
        const double v = cuts.value(j, total_charge, total_discharge);
        best = std::max(best, v);
        CHECK(result.theta.at(bus) >= v - 1e-8);
      }
      CHECK(std::abs(result.theta.at(bus) - best) <= 1e-8);
    }

    // Recomputing prices from the stored duals is exact.
    CHECK(result.lmp ==
          compute_lmps(result.lambda, result.mu, c.network.shift_factors, M));
  }
}

TEST_CASE("storage cost inside the LP equals the exact trajectory cost") {
  // Wherever the optimum has no simultaneous charge/discharge, re-pricing
  // the schedule through the exact nonconvex cost reproduces sum(theta).
  int verified = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Case c = random_small_case(seed);
    const DispatchResult result = solve_dispatch(c);
    if (result.status != LpStatus::optimal) continue;
    if (result.exactness.verdict != ExactnessVerdict::exact) continue;
    double theta_sum = 0.0, exact_sum = 0.0;
    for (const auto& [bus, asset] : c.storages) {
      Trajectory traj;
      traj.initial_soc = asset.initial_soc;
      traj.charge = result.charge[bus];
      traj.discharge = result.discharge[bus];
      for (int t = 0; t < c.horizon; ++t) {
        // Snap solver roundoff so the complementarity contract holds.
        if (traj.charge[t] < 1e-9) traj.charge[t] = 0.0;
        if (traj.discharge[t] < 1e-9) traj.discharge[t] = 0.0;
        if (traj.charge[t] > 0.0 && traj.discharge[t] > 0.0) {
          if (traj.charge[t] < traj.discharge[t]) traj.charge[t] = 0.0;
          else traj.discharge[t] = 0.0;
        }
      }
      exact_sum += trajectory_cost(traj, asset).total;
      theta_sum += result.theta.at(bus);
    }
    if (!c.storages.empty()) {
      ++verified;
      CHECK(std::abs(theta_sum - exact_sum) <= 1e-7 * (1.0 + std::abs(theta_sum)));
    }
  }
  CHECK(verified >= 30);
}

TEST_CASE("lambda matches demand-perturbation finite differences") {
  // Uncongested single-bus instances with distinct block costs: lambda is
  // the marginal cost of one more unit of demand in that interval.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Case c = arbitrage_case();
    c.demand[0][0] = 1.0 + 0.37 * static_cast<double>(seed);
    c.demand[0][1] = 9.0 + 0.11 * static_cast<double>(seed);
    const DispatchResult base = solve_dispatch(c);
    REQUIRE(base.status == LpStatus::optimal);
    for (int t = 0; t < c.horizon; ++t) {
      Case bumped = c;
      bumped.demand[0][t] += 1e-3;
      const DispatchResult moved = solve_dispatch(bumped);
      REQUIRE(moved.status == LpStatus::optimal);
      CHECK(std::abs(moved.objective - base.objective - base.lambda[t] * 1e-3) <= 1e-5);
    }
  }
}

TEST_CASE("duality gap stays certified across random dispatch solves") {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const Case c = random_small_case(seed);
    const DispatchResult result = solve_dispatch(c);
    if (result.status != LpStatus::optimal) continue;
    CHECK(std::abs(result.raw.objective - result.raw.dual_objective) <=
          1e-8 * (1.0 + std::abs(result.raw.objective)));
  }
}

TEST_CASE("result JSON and CSV emitters cover the arbitrage case") {
  const DispatchResult result = solve_dispatch(arbitrage_case());
  REQUIRE(result.status == LpStatus::optimal);

  const std::string json_text = result_to_json(result);
  CHECK(json_text.find("\"status\": \"optimal\"") != std::string::npos);
  CHECK(json_text.find("\"objective\": 52.0") != std::string::npos);
  CHECK(json_text.find("\"verdict\": \"EXACT\"") != std::string::npos);

  const std::string lmp = lmp_csv(result);
  CHECK(lmp.find("bus,t,pi\n") == 0);
  CHECK(lmp.find("1,1,5.0\n") != std::string::npos);
  CHECK(lmp.find("1,2,6.0\n") != std::string::npos);

  const std::string sched = schedule_csv(result);
  CHECK(sched.find("bus,t,gG,gC,gD,soc\n") == 0);
  CHECK(sched.find("1,1,2.0,2.0,0.0,2.0\n") != std::string::npos);
  CHECK(sched.find("1,2,8.0,0.0,2.0,0.0\n") != std::string::npos);

  Case infeasible = idle_case();
  infeasible.demand[0][0] = 1000.0;
  const DispatchResult bad = solve_dispatch(infeasible);
  CHECK(result_to_json(bad).find("\"status\": \"infeasible\"") != std::string::npos);
}
