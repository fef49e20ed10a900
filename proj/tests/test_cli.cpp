#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "yamabe/soliton.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = yamabe::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("yamabe_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const char* kSmallRuns = "[runs]\nm_list = 3, 4\nworkers = 2\n[grid]\ndx = 0.05\n[time]\ndtau = 0.002\ntau_end = -1\nsnapshot_every = 50\n";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"soliton", "--bogus"}).code == 2);
  CHECK(run({"soliton", "--config", "/nonexistent.ini"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("curvature") != std::string::npos);
}

TEST_CASE("soliton: Barenblatt section, determinism, oscillatory rejection") {
  const auto dir = scratch("soliton");
  const auto a = run({"soliton", "--lambda", "1,1.5", "--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  const auto b = run({"soliton", "--lambda", "1,1.5", "--out", (dir / "b").string()});
  REQUIRE(b.code == 0);
  for (const char* f : {"profile_lambda_1.csv", "profile_lambda_1.5.csv", "tail_fit.json"}) {
    CHECK(slurp(dir / "a/soliton" / f) == slurp(dir / "b/soliton" / f));
  }
  const auto fits = json::parse(slurp(dir / "a/soliton/tail_fit.json"));
  CHECK(fits["profiles"][0]["barenblatt"]["sup_error"].get<double>() < 1e-6);
  CHECK(fits["profiles"][1]["tail_fit"]["pass"].get<bool>());
  CHECK(json::parse(slurp(dir / "a/soliton/manifest.json"))["status"] == "ok");

  const auto bad = run({"soliton", "--lambda", "0.5", "--out", (dir / "c").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("oscillatory regime") != std::string::npos);
}

TEST_CASE("output directory falls back to YAMABE_OUT") {
  const auto dir = scratch("env");
  ::setenv("YAMABE_OUT", dir.c_str(), 1);
  const auto r = run({"soliton", "--lambda", "1.5"});
  ::unsetenv("YAMABE_OUT");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "soliton/profile_lambda_1.5.csv"));
}

TEST_CASE("ancient, curvature and rates on a small batch") {
  const auto dir = scratch("ancient");
  const auto cfg = write(dir / "small.ini", kSmallRuns);
  CHECK(run({"ancient", "--config", write(dir / "empty.ini", "[runs]\nm_list =\n").string(), "--out", dir.string()}).code == 2);

  const auto r = run({"ancient", "--config", cfg.string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto summary = json::parse(slurp(dir / "ancient/summary.json"));
  REQUIRE(summary["runs"].size() == 2);
  for (const auto& run_entry : summary["runs"]) {
    CHECK(run_entry["status"] == "ok");
    CHECK(run_entry["d_hat"].is_number());
  }
  REQUIRE(summary["nested"].size() == 1);
  CHECK(summary["nested"][0]["sup_difference"].get<double>() <= summary["nested"][0]["bound"].get<double>());
  CHECK(summary["envelope"]["D"].get<double>() > 0.0);

  const auto traj = dir / "ancient/m_4/trajectory.csv";
  const auto c = run({"curvature", "--config", cfg.string(), "--out", dir.string(), "--run", traj.string()});
  REQUIRE(c.code == 0);
  const auto overlap = json::parse(slurp(dir / "curvature/overlap.json"));
  CHECK(overlap["overlap"]["max_relative_gap"].get<double>() < 0.05);
  CHECK(overlap["sup_rm"].get<double>() < 30.0);
  CHECK(overlap["min_R_normalized"].get<double>() > 0.99);
  CHECK(fs::exists(dir / "curvature/monitor.csv"));

  const auto rates = run({"rates", "--config", cfg.string(), "--json", "--run", (dir / "ancient/m_4/run.csv").string()});
  REQUIRE(rates.code == 0);
  const auto rj = json::parse(rates.out);
  CHECK(rj["d"].get<double>() == doctest::Approx(0.916718).epsilon(1e-6));
  CHECK(rj["fits"][0]["d_hat"].is_number());
}

TEST_CASE("curvature: steady state gives constant curvature, bad input exits 2") {
  const auto dir = scratch("curvature");
  std::ostringstream csv;
  csv << "tau,x,u\n";
  for (int i = 0; i <= 1600; ++i) {
    const double x = -8.0 + 0.01 * i;
    csv << "0," << x << "," << std::setprecision(17) << yamabe::steady_state(1.0, 3, x) << "\n";
  }
  const auto traj = write(dir / "steady.csv", csv.str());
  const auto cfg = write(dir / "profile.ini", "[curvature]\nmode = profile\n");
  REQUIRE(run({"curvature", "--config", cfg.string(), "--out", dir.string(), "--run", traj.string()}).code == 0);
  std::ifstream two(dir / "curvature/two_region_0.csv");
  std::string line;
  std::getline(two, line);
  CHECK(line == "x,R_geometric,ric_radial,ric_spherical,rm_norm,polar");
  double lo = 1e300, hi = -1e300;
  while (std::getline(two, line)) {
    const double r = std::stod(line.substr(line.find(',') + 1));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK((hi - lo) / hi < 5e-3);

  CHECK(run({"curvature", "--out", dir.string(), "--run", (dir / "missing.csv").string()}).code == 2);
  CHECK(run({"curvature", "--out", dir.string(), "--run", write(dir / "bad.csv", "tau,x,u\n0,1,oops\n").string()}).code == 2);
  CHECK(run({"curvature", "--out", dir.string(), "--run", write(dir / "hdr.csv", "t,x\n").string()}).code == 2);
  CHECK(run({"curvature", "--out", dir.string()}).code == 2);
}

TEST_CASE("verify: impossible tolerances fail in a controlled way, JSON matches") {
  const auto dir = scratch("verify");
  const auto cfg = write(dir / "strict.ini", std::string(kSmallRuns) + "[acceptance]\nroot_residual = 0\nbarenblatt_sup = 0\n");
  const auto r = run({"verify", "--config", cfg.string(), "--out", dir.string(), "--json"});
  CHECK(r.code == 1);
  const auto j = json::parse(r.out);
  CHECK(j == json::parse(slurp(dir / "verify/report.json")));
  CHECK(j["criteria"].size() == 13);
  CHECK_FALSE(j["criteria"][0]["pass"].get<bool>());
  CHECK_FALSE(j["criteria"][1]["pass"].get<bool>());
  const auto man = json::parse(slurp(dir / "verify/manifest.json"));
  CHECK(man["status"] == "failed");
  CHECK(man["failure_stage"] == "acceptance");
}
