#include "rwcert/commands.hpp"
#include "rwcert/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rwcert;
namespace fs = std::filesystem;

namespace {

std::string cfg(const char* name) { return std::string(RWCERT_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("rwcert_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

int run_in(const std::string& cmd, const std::string& config, const fs::path& out, std::string* err_text = nullptr) {
  CliOptions o;
  o.command = cmd;
  o.config = config;
  o.out = out.string();
  std::ostringstream so, se;
  const int rc = run(o, so, se);
  if (err_text) *err_text = se.str();
  return rc;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream f(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(f, line)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bounds writes the certificate and table") {
  const fs::path out = scratch("bounds");
  CHECK(run_in("bounds", cfg("normal1d.cfg"), out) == kExitOk);
  CHECK(fs::exists(out / "cert.json"));
  CHECK(fs::exists(out / "bounds.csv"));
  const Json j = read_json((out / "cert.json").string());
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["command"] == "bounds");
  CHECK(j["seed"] == 1);
  fs::remove_all(out);
}

TEST_CASE("oracle exit code follows the sandwich verdict") {
  for (const char* name : {"normal1d.cfg", "logistic.cfg"}) {
    const fs::path out = scratch("oracle");
    const int rc = run_in("oracle", cfg(name), out);
    const Json j = read_json((out / "oracle.json").string());
    CHECK(rc == (j["sandwich"]["passed"].get<bool>() ? kExitOk : kExitSandwich));
    CHECK(fs::exists(out / "tv.csv"));
    CHECK(fs::exists(out / "spectrum.csv"));
    fs::remove_all(out);
  }
}

TEST_CASE("sample writes one row per recorded state") {
  const fs::path out = scratch("sample");
  CHECK(run_in("sample", cfg("mixture.cfg"), out) == kExitOk);
  const RunConfig c = load_config(cfg("mixture.cfg"));
  CHECK(line_count(out / "chain.csv") == std::size_t(1 + 1 + c.steps / c.record_every));
  fs::remove_all(out);
}

TEST_CASE("verify, lower and report") {
  const fs::path out = scratch("report");
  CHECK(run_in("verify", cfg("normal1d.cfg"), out) == kExitOk);
  const Json a = read_json((out / "assumptions.json").string());
  CHECK(a["drift_check"].is_object());
  CHECK(a["minorization_check"].is_object());
  CHECK(run_in("lower", cfg("normal1d.cfg"), out) == kExitOk);
  CHECK(fs::exists(out / "lower.csv"));
  CHECK(run_in("bounds", cfg("normal1d.cfg"), out) == kExitOk);
  CHECK(run_in("report", cfg("normal1d.cfg"), out) == kExitOk);
  const Json j = read_json((out / "report.json").string());
  CHECK(j.contains("assumptions"));
  CHECK(j.contains("cert"));
  CHECK(j["oracle"].is_null());
  fs::remove_all(out);
}

TEST_CASE("validation failures exit with 1") {
  std::string err;
  CHECK(run_in("bounds", cfg("bad_eps.cfg"), scratch("bad"), &err) == kExitValidation);
  CHECK(err.find("1/3") != std::string::npos);
  CHECK(run_in("bounds", "/nonexistent.cfg", scratch("bad")) == kExitValidation);

  std::ostringstream so, se;
  const char* argv[] = {"rwcert", "frobnicate"};
  CHECK(run_command(2, argv, so, se) != kExitOk);
  const char* argv2[] = {"rwcert", "bounds"};
  CHECK(run_command(2, argv2, so, se) != kExitOk);
}

TEST_CASE("installed binary exit codes") {
  const std::string bin = RWCERT_CLI;
  const std::string out = scratch("bin").string();
  const int rc = std::system((bin + " bounds --config " + cfg("bad_eps.cfg") + " --out " + out + " >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == kExitValidation);
  const int ok = std::system((bin + " bounds --config " + cfg("normal1d.cfg") + " --out " + out + " >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(ok) == kExitOk);
  fs::remove_all(out);
}

}
