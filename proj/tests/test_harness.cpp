#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "bethe/error.hpp"
#include "bethe/harness.hpp"

using namespace bethe;
using nlohmann::ordered_json;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.samples.rtt_pairs = 2;
  cfg.samples.yang_baxter_triples = 2;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BETHE_FORGE_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = std::string(TEST_TMP_DIR) + "/" + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(ordered_json::parse(R"({"model": {"sites": 2, "max_particles": 3},
                                                                    "sectors": [[0, 1]], "ff_sectors": [[0, 1]]})"));
  CHECK(cfg.params.sites == 2);
  CHECK(cfg.params.spacing == 0.5);
  CHECK(cfg.effective_cuts() == std::vector<int>{1});
  // round trip through JSON
  const ExperimentConfig again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again).dump() == config_to_json(cfg).dump());
  CHECK(ExperimentConfig{}.z_points().size() == 5);
}

TEST_CASE("config validation") {
  auto kind_of = [](const std::string& text) {
    try {
      parse_config(ordered_json::parse(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::invalid_argument;
  };
  auto rejects = [&](const std::string& text) { return kind_of(text) == ErrorKind::config; };
  CHECK(rejects(R"({"model": {"max_particles": 1}, "sectors": [[0, 2]]})"));
  CHECK(rejects(R"({"modle": {}})"));
  CHECK(rejects(R"({"model": {"sites": "three"}})"));
  CHECK(rejects(R"({"tolerances": {"tol_onshell": 0}})"));
  CHECK(rejects(R"({"tolerances": {"tol_nothing": 1e-3}})"));
  CHECK(rejects(R"({"cuts": [3]})"));
  CHECK(rejects(R"({"sectors": [[2, 1]]})"));
  CHECK(rejects(R"({"schema": 2})"));
  CHECK(rejects(R"({"continuum": {"delta_sequence": [0.25, 0.125]}})"));
  CHECK(rejects(R"({"continuum": {"delta_sequence": [0.25, 0.1, 0.05]}})"));
  CHECK(rejects(R"({"model": {"spacing": -1}})"));
  CHECK_NOTHROW(parse_config(ordered_json::parse("{}")));
}

TEST_CASE("suite resolution follows dependencies") {
  CHECK(resolve_suites({}).empty());
  CHECK(resolve_suites({"bv"}) == std::vector<std::string>{"rtt", "vacuum", "bethe", "bv"});
  CHECK(resolve_suites({"results"}) ==
        std::vector<std::string>{"rtt", "vacuum", "bethe", "bv", "zeromode", "ff-global", "ff-local", "results"});
  CHECK_THROWS_AS(resolve_suites({"nope"}), Error);
}

TEST_CASE("empty run") {
  const CheckReport r = run(small_config(), {});
  CHECK(r.checks.empty());
  CHECK(r.all_pass());
  const std::string text = emit_json(r);
  CHECK(text.rfind("{\n  \"schema\": 1,\n  \"checks\": []", 0) == 0);
  const ordered_json j = ordered_json::parse(text);
  CHECK(j["summary"]["total"] == 0);
  CHECK(j["summary"]["pass"] == 0);
  CHECK(j["summary"]["all_pass"] == true);
}

TEST_CASE("invalid config is rejected before any computation") {
  ExperimentConfig cfg;
  cfg.params.max_particles = 1;
  cfg.sectors = {{0, 2}};
  try {
    run(cfg, {"rtt"});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("report round trip and determinism") {
  const ExperimentConfig cfg = small_config();
  RunOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const CheckReport a = run(cfg, {"rtt", "vacuum", "bethe"}, one);
  const CheckReport b = run(cfg, {"rtt", "vacuum", "bethe"}, many);
  CHECK(a.all_pass());
  CHECK(diff_reports(a, b).identical);

  const std::string text = emit_json(a);
  const CheckReport back = report_from_json(ordered_json::parse(text));
  CHECK(diff_reports(a, back).identical);
  REQUIRE(back.checks.size() == a.checks.size());
  for (std::size_t k = 0; k < a.checks.size(); ++k) {
    CHECK(back.checks[k].residual == a.checks[k].residual);
    CHECK(back.checks[k].wall_ms == a.checks[k].wall_ms);
    CHECK(back.checks[k].digest == a.checks[k].digest);
  }
  // residuals carry 17 significant digits in scientific notation
  CHECK(text.find("\"tolerance\": 1.0000000000000000e-10") != std::string::npos);
  // complex values as {re, im}
  const ordered_json j = ordered_json::parse(text);
  bool found_complex = false;
  for (const auto& c : j["checks"])
    for (const auto& v : c["values"]) found_complex = found_complex || (v["value"].contains("re") && v["value"].contains("im"));
  CHECK(found_complex);
  // key order is stable
  auto it = j.begin();
  CHECK(it.key() == "schema");
  CHECK((++it).key() == "checks");
  CHECK((++it).key() == "summary");

  // a different seed changes the sampled inputs
  ExperimentConfig other = cfg;
  other.seed += 1;
  CHECK_FALSE(diff_reports(a, run(other, {"rtt"}, one)).identical);
}

TEST_CASE("failed dependencies block downstream suites") {
  ExperimentConfig cfg = small_config();
  cfg.tol.onshell = 1e-300;  // the bethe suite cannot pass
  const CheckReport r = run(cfg, {"bv", "composite"});
  bool bethe_failed = false, bv_blocked = false, composite_ran = false;
  for (const auto& c : r.checks) {
    if (c.suite == "bethe" && c.status == CheckStatus::fail) bethe_failed = true;
    if (c.suite == "bv") {
      CHECK(c.status == CheckStatus::blocked);
      bv_blocked = true;
    }
    if (c.suite == "composite" && c.status == CheckStatus::pass) composite_ran = true;
  }
  CHECK(bethe_failed);
  CHECK(bv_blocked);
  CHECK(composite_ran);
  CHECK_FALSE(r.all_pass());
  // the blocked record survives a round trip, NaN residual included
  const CheckReport back = report_from_json(ordered_json::parse(emit_json(r)));
  CHECK(diff_reports(r, back).identical);
  CHECK(emit_text(r).find("BLOCKED") != std::string::npos);
}

TEST_CASE("report diff reports changed values") {
  CheckReport a;
  CheckRecord rec;
  rec.suite = "rtt";
  rec.name = "rtt.x";
  rec.residual = 1e-15;
  rec.tolerance = 1e-10;
  rec.status = CheckStatus::pass;
  a.checks.push_back(rec);
  CheckReport b = a;
  b.checks[0].wall_ms = 99.0;
  CHECK(diff_reports(a, b).identical);
  b.checks[0].residual = 2e-15;
  CHECK_FALSE(diff_reports(a, b).identical);
  b.checks.push_back(rec);
  b.checks.back().name = "rtt.y";
  CHECK(diff_reports(a, b).lines.size() == 2);
}

TEST_CASE("thread cap from the environment") {
  setenv("BETHE_FORGE_THREADS", "3", 1);
  CHECK(thread_cap_from_env() == 3);
  setenv("BETHE_FORGE_THREADS", "zero", 1);
  CHECK_THROWS_AS(thread_cap_from_env(), Error);
  unsetenv("BETHE_FORGE_THREADS");
  CHECK(thread_cap_from_env() >= 1);
}

TEST_CASE("command line exit codes") {
  const std::string good = write_temp("good.json", R"({"model": {"sites": 2, "max_particles": 3},
      "sectors": [[0, 1]], "ff_sectors": [[0, 1]], "samples": {"rtt_pairs": 2}})");
  const std::string bad = write_temp("bad.json", R"({"model": {"max_particles": 1}, "sectors": [[0, 2]]})");
  const std::string strict = write_temp("strict.json", R"({"model": {"sites": 2, "max_particles": 3},
      "sectors": [[0, 1]], "ff_sectors": [[0, 1]], "tolerances": {"tol_exact": 1e-300}})");
  const std::string out_a = std::string(TEST_TMP_DIR) + "/a.json";
  const std::string out_b = std::string(TEST_TMP_DIR) + "/b.json";
  CHECK(run_cli("run --config " + good + " --suite rtt --suite bethe --out " + out_a) == 0);
  CHECK(run_cli("run --config " + good + " --suite rtt --suite bethe --format text") == 0);
  CHECK(run_cli("run --config " + bad) == 2);
  CHECK(run_cli("run --config " + std::string(TEST_TMP_DIR) + "/missing.json") == 2);
  CHECK(run_cli("run --config " + good + " --suite unknown") == 2);
  CHECK(run_cli("run --config " + strict + " --suite rtt --out " + out_b) == 1);
  CHECK(run_cli("report-diff " + out_a + " " + out_a) == 0);
  CHECK(run_cli("report-diff " + out_a + " " + out_b) == 1);
  CHECK(run_cli("solve --sector 0,1 --config " + good) == 0);
  CHECK(run_cli("solve --sector 0,x --config " + good) == 2);
}
