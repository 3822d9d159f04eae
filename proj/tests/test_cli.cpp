#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rgarch/io.hpp"
#include "rgarch/process.hpp"

using namespace rgarch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Path of the command line binary: the RGARCH_CLI_BIN environment variable
/// when set, otherwise the sibling tools/ directory of this test binary.
std::optional<fs::path> cli_binary() {
  if (const char* env = std::getenv("RGARCH_CLI_BIN")) return fs::path(env);
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path guess = self.parent_path().parent_path() / "tools" / "rgarch";
    if (fs::exists(guess)) return guess;
  }
  return std::nullopt;
}

struct CmdResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir() {
  static const fs::path base = [] {
    const fs::path dir = fs::temp_directory_path() / "rgarch_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
  }();
  return base;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = scratch_dir() / name;
  fs::remove_all(dir);
  return dir;
}

/// Runs the binary through the shell; `env_prefix` may carry VAR=value
/// assignments.  Exit status is the process exit code.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const auto bin = cli_binary();
  REQUIRE(bin.has_value());
  const fs::path out_file = scratch_dir() / "stdout.txt";
  const fs::path err_file = scratch_dir() / "stderr.txt";
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += bin->string() + " " + args + " >" + out_file.string() + " 2>" + err_file.string();
  const int raw = std::system(cmd.c_str());
  CmdResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

/// Shared simulated dataset: k=6, n=160, order (1,0).
const fs::path& base_rankings() {
  static const fs::path path = [] {
    const fs::path dir = fresh_dir("base_sim");
    const auto r = run_cli("simulate --k 6 --n 160 --phi0 2.0 --phi 0.35 --seed 303 --out " +
                           dir.string());
    REQUIRE(r.status == 0);
    return dir / "rankings.csv";
  }();
  return path;
}

/// Copy of the base data with a few rows degraded to NA cells.
const fs::path& missing_rankings() {
  static const fs::path path = [] {
    const fs::path out = scratch_dir() / "missing.csv";
    auto series = read_rankings_csv(base_rankings().string());
    for (int t : {10, 41, 77, 113, 140}) {
      auto entries = series.row(t).entries();
      entries[1] = PartialRanking::missing;
      entries[4] = PartialRanking::missing;
      series.set_row(t, PartialRanking(std::move(entries)));
    }
    write_rankings_csv(out.string(), series);
    return out;
  }();
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("simulate writes a parseable bundle and reruns byte for byte") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path dir = fresh_dir("sim");
  const std::string args =
      "simulate --k 5 --n 40 --phi0 1.5 --phi 0.2 --alpha 0.1 --seed 99 --out " + dir.string();
  REQUIRE(run_cli(args).status == 0);

  const auto series = read_rankings_csv((dir / "rankings.csv").string());
  CHECK(series.k() == 5);
  CHECK(series.size() == 40);
  CHECK(series.complete());

  const json meta = json::parse(slurp(dir / "metadata.json"));
  CHECK(meta.at("command") == "simulate");
  CHECK(meta.at("config").at("seed") == 99);
  CHECK(meta.at("config").at("seed_source") == "flag");
  CHECK(meta.at("config").at("coefficients").at("phi0") == 1.5);
  CHECK(meta.at("version").is_string());

  const std::string rankings = slurp(dir / "rankings.csv");
  const std::string mean_path = slurp(dir / "mean_path.csv");
  const std::string metadata = slurp(dir / "metadata.json");
  REQUIRE(run_cli(args).status == 0);
  CHECK(slurp(dir / "rankings.csv") == rankings);
  CHECK(slurp(dir / "mean_path.csv") == mean_path);
  CHECK(slurp(dir / "metadata.json") == metadata);
}

TEST_CASE("seed resolution prefers the flag over the environment") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path flag_dir = fresh_dir("seed_flag");
  const fs::path env_dir = fresh_dir("seed_env");
  const fs::path both_dir = fresh_dir("seed_both");
  const std::string tail = " --k 5 --n 25 --phi0 1.0 --out ";
  REQUIRE(run_cli("simulate --seed 77" + tail + flag_dir.string()).status == 0);
  REQUIRE(run_cli("simulate" + tail + env_dir.string(), "RGARCH_SEED=77").status == 0);
  REQUIRE(run_cli("simulate --seed 77" + tail + both_dir.string(), "RGARCH_SEED=1234").status ==
          0);

  CHECK(slurp(flag_dir / "rankings.csv") == slurp(env_dir / "rankings.csv"));
  CHECK(slurp(flag_dir / "rankings.csv") == slurp(both_dir / "rankings.csv"));
  CHECK(json::parse(slurp(env_dir / "metadata.json")).at("config").at("seed_source") == "env");
  CHECK(json::parse(slurp(both_dir / "metadata.json")).at("config").at("seed_source") ==
        "flag");

  CHECK(run_cli("simulate" + tail + fresh_dir("seed_bad").string(), "RGARCH_SEED=banana")
            .status == 2);
}

TEST_CASE("simulate rejects non-stationary coefficients without the override") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const std::string tail = " --k 5 --n 10 --phi0 3 --phi 0.8 --alpha 0.4 --out " +
                           fresh_dir("nonstat").string();
  const auto denied = run_cli("simulate" + tail);
  CHECK(denied.status == 2);
  CHECK(denied.err.find("non-stationary") != std::string::npos);
  CHECK(run_cli("simulate --allow-nonstationary" + tail).status == 0);
}

TEST_CASE("fit emits estimates, diagnostics and an autocorrelation table") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path dir = fresh_dir("fit");
  const auto r = run_cli("fit --data " + base_rankings().string() + " --order 1 0 --out " +
                         dir.string());
  REQUIRE(r.status == 0);

  const json fit = json::parse(slurp(dir / "fit.json"));
  CHECK(fit.at("k") == 6);
  CHECK(fit.at("order").at("p") == 1);
  CHECK(fit.at("order").at("q") == 0);
  CHECK(fit.at("converged") == true);
  CHECK(fit.at("coefficients").at("phi").size() == 1);
  const double phi1 = fit.at("coefficients").at("phi").at(0).get<double>();
  CHECK(phi1 > 0.1);
  CHECK(phi1 < 0.6);

  CHECK(slurp(dir / "mean_path.csv").rfind("row,mu,theta\n", 0) == 0);
  CHECK(slurp(dir / "residuals.csv").rfind("row,residual,scaled\n", 0) == 0);
  CHECK(slurp(dir / "acf.csv").rfind("lag,acf,pacf,model_rho\n", 0) == 0);
}

TEST_CASE("fit with --scan records the grid and keeps the best BIC order") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path dir = fresh_dir("scan");
  const auto r = run_cli("fit --data " + base_rankings().string() + " --scan 1 1 --out " +
                         dir.string());
  REQUIRE(r.status == 0);

  const std::string grid = slurp(dir / "order_scan.csv");
  CHECK(grid.rfind("p,q,ok,converged,loglik,aic,bic,message\n", 0) == 0);
  // 2x2 grid: header plus four rows
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 5);

  const json meta = json::parse(slurp(dir / "metadata.json"));
  const json fit = json::parse(slurp(dir / "fit.json"));
  CHECK(meta.at("config").at("scan").at("best_bic") == meta.at("config").at("order"));
  CHECK(fit.at("order") == meta.at("config").at("order"));
}

TEST_CASE("fit refuses incomplete data and points at the em fitter") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const auto r = run_cli("fit --data " + missing_rankings().string() + " --order 1 0 --out " +
                         fresh_dir("fit_na").string());
  CHECK(r.status == 2);
  CHECK(r.err.find("mcem-fit") != std::string::npos);
  CHECK(r.err.find("5 incomplete rows") != std::string::npos);
}

TEST_CASE("mcem-fit handles NA cells and writes a trace") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path dir = fresh_dir("em");
  const auto r = run_cli("mcem-fit --data " + missing_rankings().string() +
                         " --order 1 0 --imputations 30 --epsilon 0.2 --seed 17 --out " +
                         dir.string());
  REQUIRE(r.status == 0);

  const json fit = json::parse(slurp(dir / "fit.json"));
  CHECK(fit.at("converged") == true);
  const double phi1 = fit.at("coefficients").at("phi").at(0).get<double>();
  CHECK(phi1 > 0.1);
  CHECK(phi1 < 0.6);

  const std::string trace = slurp(dir / "mcem_trace.csv");
  CHECK(trace.rfind("iteration,n_imputations,q_value,delta_mean,delta_se,ratio_sd,"
                    "heldout_loglik,accepted,phi0,phi1\n",
                    0) == 0);
  CHECK(json::parse(slurp(dir / "metadata.json")).at("config").at("incomplete_rows") == 5);
}

TEST_CASE("predict chains from a fit file and reports both estimates under --exact") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path fit_dir = fresh_dir("pred_fit");
  REQUIRE(run_cli("fit --data " + base_rankings().string() + " --order 1 0 --out " +
                  fit_dir.string())
              .status == 0);

  const fs::path dir = fresh_dir("pred");
  const auto r = run_cli("predict --data " + base_rankings().string() + " --fit " +
                         (fit_dir / "fit.json").string() +
                         " --event \"2=1,4=3\" --draws 3000 --density mallows --exact "
                         "--seed 5 --out " +
                         dir.string());
  REQUIRE(r.status == 0);

  const json pred = json::parse(slurp(dir / "prediction.json"));
  CHECK(pred.at("mu").get<double>() > 0);
  CHECK(pred.at("theta").get<double>() > 0);
  CHECK(pred.at("mode").size() == 6);
  const json& ev = pred.at("event");
  CHECK(ev.at("method") == "importance");
  CHECK(ev.at("n_draws") == 3000);
  const double est = ev.at("probability").get<double>();
  const double se = ev.at("std_error").get<double>();
  const double exact = ev.at("exact_probability").get<double>();
  CHECK(std::abs(est - exact) < 6 * se + 1e-12);
  CHECK(exact > 0);
  CHECK(exact < 1);
}

TEST_CASE("predict validates model source and event spelling") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const std::string data = base_rankings().string();
  // no model at all
  CHECK(run_cli("predict --data " + data + " --out " + fresh_dir("p1").string()).status == 2);
  // malformed event
  CHECK(run_cli("predict --data " + data + " --phi0 2 --phi 0.3 --event \"2:1\" --out " +
                fresh_dir("p2").string())
            .status == 2);
  // event rank out of range
  CHECK(run_cli("predict --data " + data + " --phi0 2 --phi 0.3 --event \"2=9\" --out " +
                fresh_dir("p3").string())
            .status == 2);
}

TEST_CASE("acf writes the model overlay and rejects a distance mismatch") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path fit_dir = fresh_dir("acf_fit");
  REQUIRE(run_cli("fit --data " + base_rankings().string() + " --order 1 0 --out " +
                  fit_dir.string())
              .status == 0);

  const fs::path dir = fresh_dir("acf");
  const auto r = run_cli("acf --data " + base_rankings().string() + " --max-lag 6 --fit " +
                         (fit_dir / "fit.json").string() + " --out " + dir.string());
  REQUIRE(r.status == 0);
  const std::string table = slurp(dir / "acf.csv");
  CHECK(table.rfind("lag,acf,pacf,model_rho\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);

  const auto mismatch = run_cli("acf --data " + base_rankings().string() +
                                " --distance hamming --fit " + (fit_dir / "fit.json").string() +
                                " --out " + fresh_dir("acf_mix").string());
  CHECK(mismatch.status == 2);
  CHECK(mismatch.err.find("distance") != std::string::npos);
}

TEST_CASE("replicate summarizes the sampling distribution") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  const fs::path dir = fresh_dir("rep");
  const auto r = run_cli(
      "replicate --k 5 --n 90 --reps 4 --phi0 1.2 --phi 0.3 --workers 2 --seed 21 --out " +
      dir.string());
  REQUIRE(r.status == 0);

  const json summary = json::parse(slurp(dir / "replication.json"));
  CHECK(summary.at("reps") == 4);
  CHECK(summary.at("coefficients").size() == 2);
  CHECK(summary.at("coefficients").at(0).at("name") == "phi0");

  const std::string estimates = slurp(dir / "estimates.csv");
  CHECK(estimates.rfind("rep,ok,converged,phi0,phi1,se_phi0,se_phi1,message\n", 0) == 0);
  CHECK(std::count(estimates.begin(), estimates.end(), '\n') == 5);
}

TEST_CASE("help exits cleanly and unknown flags are validation errors") {
  if (!cli_binary()) {
    MESSAGE("cli binary not found; skipping");
    return;
  }
  CHECK(run_cli("--help").status == 0);
  CHECK(run_cli("fit --help").status == 0);
  CHECK(run_cli("fit --data x.csv --bogus 1").status == 2);
  CHECK(run_cli("").status == 2);  // a subcommand is required
}

TEST_SUITE_END();
