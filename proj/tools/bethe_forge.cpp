#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bethe/error.hpp"
#include "bethe/harness.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_config = 2;

std::vector<double> split_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw bethe::Error(bethe::ErrorKind::config, what + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != expected)
    throw bethe::Error(bethe::ErrorKind::config, what + " needs " + std::to_string(expected) + " comma-separated values");
  return out;
}

bethe::CheckReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bethe::Error(bethe::ErrorKind::config, "cannot open report " + path);
  try {
    return bethe::report_from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw bethe::Error(bethe::ErrorKind::config, path + " is not valid JSON: " + e.what());
  } catch (const bethe::Error& e) {
    throw bethe::Error(bethe::ErrorKind::config, path + ": " + e.what());
  }
}

int cmd_run(const std::string& config_path, std::vector<std::string> suites, const std::string& format,
            const std::string& out_path) {
  const bethe::ExperimentConfig cfg = bethe::load_config(config_path);
  if (suites.empty()) suites = bethe::suite_names();
  bethe::RunOptions opts;
  opts.threads = bethe::thread_cap_from_env();
  const bethe::CheckReport report = bethe::run(cfg, suites, opts);
  const std::string body = format == "text" ? bethe::emit_text(report) : bethe::emit_json(report);
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << body;
    if (!out) throw std::runtime_error("write to " + out_path + " failed");
    std::cout << report.count(bethe::CheckStatus::pass) << "/" << report.checks.size() << " pass, "
              << report.count(bethe::CheckStatus::fail) << " fail, " << report.count(bethe::CheckStatus::blocked)
              << " blocked\n";
  }
  return report.all_pass() ? exit_pass : exit_fail;
}

int cmd_solve(const std::string& config_path, const std::string& sector, int count, const std::string& twist_text) {
  const bethe::ExperimentConfig cfg = bethe::load_config(config_path);
  const auto ab = split_numbers(sector, 2, "--sector");
  const int a = static_cast<int>(ab[0]), b = static_cast<int>(ab[1]);
  if (a != ab[0] || b != ab[1] || a < 0 || b < 0)
    throw bethe::Error(bethe::ErrorKind::config, "--sector needs two non-negative integers");
  bethe::Twist twist;
  if (!twist_text.empty()) {
    const auto beta = split_numbers(twist_text, 3, "--twist");
    for (std::size_t k = 0; k < 3; ++k) twist.beta[k] = beta[k];
  }
  bethe::SolverOptions opts;
  opts.tol = cfg.tol.onshell;
  opts.seed = cfg.seed;
  const auto sols = bethe::find_solutions(a, b, cfg.params, count, twist, opts);
  nlohmann::ordered_json j;
  j["sector"] = {a, b};
  j["twist"] = {twist.beta[0].real(), twist.beta[1].real(), twist.beta[2].real()};
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  auto cjson = [](bethe::cplx z) { return nlohmann::ordered_json{{"re", z.real()}, {"im", z.imag()}}; };
  for (const auto& s : sols) {
    nlohmann::ordered_json rec;
    rec["u"] = nlohmann::ordered_json::array();
    for (const auto& x : s.u) rec["u"].push_back(cjson(x));
    rec["v"] = nlohmann::ordered_json::array();
    for (const auto& x : s.v) rec["v"].push_back(cjson(x));
    rec["residual"] = s.residual;
    list.push_back(rec);
  }
  j["solutions"] = list;
  std::cout << bethe::dump_json(j) << "\n";
  if (sols.empty()) {
    std::cerr << "no finite solution found for sector (" << a << "," << b << ")";
    if (twist.is_zero() && a >= 1) std::cerr << "; try a nonzero --twist";
    std::cerr << "\n";
    return exit_fail;
  }
  return exit_pass;
}

int cmd_diff(const std::string& a, const std::string& b) {
  const bethe::ReportDiff d = bethe::diff_reports(read_report(a), read_report(b));
  for (const auto& line : d.lines) std::cout << line << "\n";
  if (d.identical) std::cout << "reports agree on every value field\n";
  return d.identical ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact verification engine for the algebraic Bethe ansatz of the lattice two-component Bose gas"};
  app.require_subcommand(1);

  std::string config_path, format = "json", out_path, sector, twist_text, diff_a, diff_b;
  std::vector<std::string> suites;
  int count = 3;

  auto* run = app.add_subcommand("run", "Run check suites and emit a report");
  run->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  run->add_option("--suite", suites, "Suite to run (repeatable; default: all)")
      ->check(CLI::IsMember(bethe::suite_names()));
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
  run->add_option("--out", out_path, "Write the report to this file");

  auto* solve = app.add_subcommand("solve", "Solve the Bethe equations in one sector");
  solve->add_option("--sector", sector, "Sector a,b")->required();
  solve->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  solve->add_option("--count", count, "Maximum number of solutions")->check(CLI::PositiveNumber);
  solve->add_option("--twist", twist_text, "Twist b1,b2,b3");

  auto* diff = app.add_subcommand("report-diff", "Compare two JSON reports on value fields");
  diff->add_option("a", diff_a, "First report")->required();
  diff->add_option("b", diff_b, "Second report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*run) return cmd_run(config_path, suites, format, out_path);
    if (*solve) return cmd_solve(config_path, sector, count, twist_text);
    return cmd_diff(diff_a, diff_b);
  } catch (const bethe::Error& e) {
    std::cerr << "bethe-forge: " << bethe::to_string(e.kind()) << " error: " << e.what() << "\n";
    return e.kind() == bethe::ErrorKind::config || e.kind() == bethe::ErrorKind::invalid_argument ? exit_config
                                                                                                 : exit_fail;
  } catch (const std::exception& e) {
    std::cerr << "bethe-forge: " << e.what() << "\n";
    return exit_fail;
  }
}
