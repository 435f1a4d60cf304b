// Command-line front end: solve | check-bid | fit-bid | verify.
// Exit codes: 0 success, 1 infeasible or failed check, 2 input error,
// 3 internal numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "socdispatch/dispatch.hpp"
#include "socdispatch/edcr_fit.hpp"
#include "socdispatch/errors.hpp"
#include "socdispatch/oracle.hpp"

namespace fs = std::filesystem;
using namespace socdispatch;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write file: " + path.string());
  out << content;
}

int cmd_solve(const std::string& case_path, const std::string& out_dir, double tol,
              int check_oracle_steps) {
  const Case c = load_case(read_file(case_path));
  DispatchOptions options;
  if (tol > 0.0) options.exactness_tol = tol;
  const DispatchResult result = solve_dispatch(c, options);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "result.json", result_to_json(result));
  if (result.status != LpStatus::optimal) {
    std::cout << "dispatch "
              << (result.status == LpStatus::infeasible ? "infeasible" : "unbounded") << "\n";
    return kInfeasible;
  }

  write_file(fs::path(out_dir) / "schedule.csv", schedule_csv(result));
  write_file(fs::path(out_dir) / "lmp.csv", lmp_csv(result));
  {
    std::ostringstream ex;
    ex << "{\n  \"verdict\": \"" << to_string(result.exactness.verdict) << "\",\n"
       << "  \"min_lmp\": " << result.exactness.min_lmp << ",\n"
       << "  \"simultaneous\": " << result.exactness.simultaneous.size() << "\n}\n";
    write_file(fs::path(out_dir) / "exactness.json", ex.str());
  }

  std::cout << "objective " << result.objective << "\n"
            << "exactness " << to_string(result.exactness.verdict) << " (min LMP "
            << result.exactness.min_lmp << ")\n";

  if (check_oracle_steps > 0) {
    const BruteForceResult oracle = brute_force_dispatch(c, GridSpec{check_oracle_steps});
    std::ostringstream report;
    report << "{\n  \"lp_objective\": " << result.objective;
    if (oracle.feasible) {
      report << ",\n  \"oracle_objective\": " << oracle.objective
             << ",\n  \"gap\": " << oracle.objective - result.objective
             << ",\n  \"grid_bound\": " << oracle.grid_bound;
      std::cout << "oracle objective " << oracle.objective << " (gap "
                << oracle.objective - result.objective << ", grid bound " << oracle.grid_bound
                << ")\n";
    } else {
      report << ",\n  \"oracle_objective\": null";
      std::cout << "oracle found no feasible grid point\n";
    }
    report << "\n}\n";
    write_file(fs::path(out_dir) / "oracle.json", report.str());
  }

  return result.exactness.verdict == ExactnessVerdict::precondition_unmet ? kInfeasible : kOk;
}

int cmd_check_bid(const std::string& bid_path, double tol) {
  const StorageAsset asset = parse_bid_json(read_file(bid_path));
  const ValidationReport report = validate_bid(asset);
  if (!report.ok()) {
    std::cout << "invalid bid:\n";
    for (const auto& v : report.violations) std::cout << "  - " << v << "\n";
    return kInputError;
  }
  const EdcrCheck check = edcr_residuals(asset, tol > 0.0 ? tol : 1e-9);
  std::cout << "bid valid\nEDCR residuals:";
  for (double r : check.residuals) std::cout << " " << r;
  if (check.residuals.empty()) std::cout << " (none, single segment)";
  std::cout << "\nEDCR: " << (check.is_edcr ? "yes" : "no") << "\n";
  return check.is_edcr ? kOk : kInfeasible;
}

int cmd_fit_bid(const std::string& bid_path, const std::string& out_dir) {
  const StorageAsset asset = parse_bid_json(read_file(bid_path));
  FitSpec spec;
  const BidCurve fitted_curve = fit_edcr(asset.bid, asset.eta_c, asset.eta_d, spec);
  StorageAsset fitted = asset;
  fitted.bid = fitted_curve;
  const FitReport report = fit_report(asset.bid, fitted_curve, asset.eta_c, asset.eta_d, spec);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "fitted_bid.json", bid_to_json(fitted));
  write_file(fs::path(out_dir) / "fit_report.json", fit_report_to_json(report));
  std::cout << "fit objective " << report.objective << ", worst deviation "
            << report.worst_abs_deviation << "\n";
  return kOk;
}

int cmd_verify(std::uint64_t seed, int num_cases) {
  const SweepReport sweep = run_theorem1_sweep(num_cases, seed);
  std::cout << "equivalence sweep: " << sweep.cases << " cases, max relative deviation "
            << sweep.max_rel_deviation << ", argmax mismatches " << sweep.argmax_mismatches
            << "\n";

  const int suite_cases = std::min(num_cases, 200);
  const ExactnessSuiteReport suite = run_exactness_suite(suite_cases, seed);
  std::cout << "exactness suite: " << suite.optimal << "/" << suite.cases
            << " optimal, exact " << suite.exact << ", violations " << suite.violations
            << ", precondition unmet " << suite.precondition_unmet << ", min LMP "
            << suite.min_lmp_seen << "\n";

  // Control arm, informational: without the EDCR tie the cut family really
  // does diverge from the exact cost.
  if (num_cases > 0) {
    const DeviationWitness witness = find_nonconvexity_witness(std::min(num_cases, 2000), seed);
    std::cout << "non-EDCR control arm: max deviation " << witness.deviation << " (seed "
              << witness.seed << ")\n";
  }

  const bool ok = sweep.max_rel_deviation <= 1e-9 && sweep.argmax_mismatches == 0 &&
                  suite.violations == 0;
  std::cout << (ok ? "verify PASS" : "verify FAIL") << "\n";
  return ok ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-interval economic dispatch with SoC-dependent storage bids"};
  app.require_subcommand(1);

  std::string case_path, bid_path, out_dir = ".";
  double tol = 0.0;
  int check_oracle = 0;
  int grid_steps = 4;
  std::uint64_t seed = 42;
  int num_cases = 1000;

  CLI::App* solve = app.add_subcommand("solve", "Clear a case file and write result files");
  solve->add_option("case", case_path, "case JSON file")->required();
  solve->add_option("--out", out_dir, "output directory");
  solve->add_option("--tol", tol, "exactness tolerance");
  solve->add_option("--check-oracle", check_oracle,
                    "also run the brute-force oracle with this many grid steps");

  CLI::App* check = app.add_subcommand("check-bid", "Validate a bid and its EDCR residuals");
  check->add_option("bid", bid_path, "bid JSON file")->required();
  check->add_option("--tol", tol, "EDCR residual tolerance");

  CLI::App* fit = app.add_subcommand("fit-bid", "Project a bid onto the EDCR-compliant set");
  fit->add_option("bid", bid_path, "bid JSON file")->required();
  fit->add_option("--out", out_dir, "output directory");

  CLI::App* verify = app.add_subcommand("verify", "Run the randomized verification suites");
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--num-cases", num_cases, "number of randomized cases");
  verify->add_option("--grid-steps", grid_steps, "oracle grid steps (reserved)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(case_path, out_dir, tol, check_oracle);
    if (check->parsed()) return cmd_check_bid(bid_path, tol);
    if (fit->parsed()) return cmd_fit_bid(bid_path, out_dir);
    if (verify->parsed()) return cmd_verify(seed, num_cases);
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kInputError;
}
