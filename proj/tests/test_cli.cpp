#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "socdispatch/network.hpp"

using namespace socdispatch;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "socdispatch_cli_out.txt";
  const std::string cmd =
      std::string(SOCDISPATCH_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  int code = -1;
  if (WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, ss.str()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "socdispatch_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Case arbitrage_case() {
  Case c;
  c.network.num_buses = 1;
  c.horizon = 2;
  c.demand = {{0.0, 10.0}};
  c.generators[0].blocks = {{8.0, 5.0}};
  BidCurve bid;
  bid.boundaries = {0.0, 10.0};
  bid.charge_benefits = {1.0};
  bid.discharge_costs = {2.0};
  c.storages[0] = make_asset(bid, 1.0, 1.0, 10.0, 10.0, 0.0);
  return c;
}

const char* kEdcrBid = R"({
  "boundaries": [0, 2, 4],
  "charge_benefits": [10, 6],
  "discharge_costs": [20, 16],
  "eta_c": 1.0, "eta_d": 1.0,
  "p_charge_max": 5, "p_discharge_max": 5,
  "initial_soc": 1
})";

const char* kNonEdcrBid = R"({
  "boundaries": [0, 2, 4],
  "charge_benefits": [10, 6],
  "discharge_costs": [21, 15],
  "eta_c": 1.0, "eta_d": 1.0,
  "p_charge_max": 5, "p_discharge_max": 5,
  "initial_soc": 1
})";

const char* kInvalidBid = R"({
  "boundaries": [0, 2, 4],
  "charge_benefits": [6, 10],
  "discharge_costs": [20, 16],
  "eta_c": 1.0, "eta_d": 1.0,
  "p_charge_max": 5, "p_discharge_max": 5,
  "initial_soc": 1
})";

}  // namespace

TEST_CASE("solve writes result files and plot-ready CSVs") {
  const fs::path dir = scratch_dir();
  const fs::path case_path = dir / "arbitrage.json";
  write(case_path, serialize_case(arbitrage_case()));
  const fs::path out = dir / "out";

  const RunResult r = run_cli("solve " + case_path.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "result.json"));
  CHECK(fs::exists(out / "schedule.csv"));
  CHECK(fs::exists(out / "lmp.csv"));
  CHECK(fs::exists(out / "exactness.json"));

  const std::string lmp = slurp(out / "lmp.csv");
  CHECK(lmp.find("bus,t,pi\n") == 0);
  CHECK(lmp.find("1,1,5.0\n") != std::string::npos);
  CHECK(lmp.find("1,2,6.0\n") != std::string::npos);
  CHECK(slurp(out / "exactness.json").find("EXACT") != std::string::npos);
}

TEST_CASE("solve --check-oracle reports the gap") {
  const fs::path dir = scratch_dir();
  const fs::path case_path = dir / "arbitrage.json";
  write(case_path, serialize_case(arbitrage_case()));
  const fs::path out = dir / "out_oracle";

  const RunResult r = run_cli("solve " + case_path.string() + " --out " + out.string() +
                              " --check-oracle 20");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("oracle objective 52") != std::string::npos);
  CHECK(fs::exists(out / "oracle.json"));
}

TEST_CASE("malformed case files exit 2 with a byte offset") {
  const fs::path dir = scratch_dir();
  const fs::path bad = dir / "bad.json";
  write(bad, "{\"num_buses\": ");
  const RunResult r = run_cli("solve " + bad.string() + " --out " + (dir / "x").string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("byte") != std::string::npos);
}

TEST_CASE("infeasible cases exit 1") {
  const fs::path dir = scratch_dir();
  Case c = arbitrage_case();
  c.demand[0][1] = 1000.0;
  const fs::path case_path = dir / "infeasible.json";
  write(case_path, serialize_case(c));
  const RunResult r = run_cli("solve " + case_path.string() + " --out " + (dir / "y").string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("infeasible") != std::string::npos);
}

TEST_CASE("check-bid distinguishes EDCR, non-EDCR and invalid bids") {
  const fs::path dir = scratch_dir();
  write(dir / "edcr.json", kEdcrBid);
  write(dir / "non_edcr.json", kNonEdcrBid);
  write(dir / "invalid.json", kInvalidBid);

  CHECK(run_cli("check-bid " + (dir / "edcr.json").string()).exit_code == 0);

  const RunResult non = run_cli("check-bid " + (dir / "non_edcr.json").string());
  CHECK(non.exit_code == 1);
  CHECK(non.output.find("residuals") != std::string::npos);

  const RunResult bad = run_cli("check-bid " + (dir / "invalid.json").string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("nonincreasing") != std::string::npos);
}

TEST_CASE("fit-bid writes a fitted bid that then passes check-bid") {
  const fs::path dir = scratch_dir();
  write(dir / "non_edcr.json", kNonEdcrBid);
  const fs::path out = dir / "fit";
  const RunResult r =
      run_cli("fit-bid " + (dir / "non_edcr.json").string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "fitted_bid.json"));
  CHECK(fs::exists(out / "fit_report.json"));
  CHECK(run_cli("check-bid " + (out / "fitted_bid.json").string()).exit_code == 0);
  CHECK(slurp(out / "fit_report.json").find("objective") != std::string::npos);
}

TEST_CASE("verify passes with defaults scaled down and is trivial at zero") {
  const RunResult r = run_cli("verify --seed 3 --num-cases 60");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verify PASS") != std::string::npos);
  CHECK(r.output.find("non-EDCR control arm") != std::string::npos);

  const RunResult zero = run_cli("verify --num-cases 0");
  CHECK(zero.exit_code == 0);
}

TEST_CASE("unknown arguments are rejected") {
  const RunResult r = run_cli("frobnicate");
  CHECK(r.exit_code != 0);
}
