#pragma once

// Batch driver: experiment configuration, check suites with dependency
// gating, and JSON/text reports.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bethe/continuum.hpp"

namespace bethe {

using Sector = std::pair<int, int>;

struct Tolerances {
  double onshell = 1e-10;      // cleared Bethe residual, closed-form roots
  double identity = 1e-10;     // RTT, sl(3) brackets, composite factorization
  double exact = 1e-12;        // Yang-Baxter, vacuum action, reconstructions
  double eigen = 1e-8;         // eigenvector residuals
  double annihilation = 1e-9;  // highest-weight annihilations, zero-mode limits
  double limit = 1e-9;         // limits at infinity inside form factors
  double form_factor = 1e-8;   // z-spread, local-operator identity
  double generating = 1e-7;    // generating functional and diagonal identities
  double derivative = 1e-8;    // finite differences vs implicit derivatives
  double continuum = 1e-3;     // extrapolated continuum prefactors
};

struct SampleCounts {
  int rtt_pairs = 10;
  int yang_baxter_triples = 5;
  int vacuum_points = 5;
  int eigen_points = 5;
};

struct ContinuumConfig {
  double length = 1.0;
  std::vector<double> delta_sequence{0.25, 0.125, 0.0625};
  double x_fraction = 0.25;
  int max_particles = 2;
  double rate_min = 1.7;
  double rate_max = 2.3;
};

struct ExperimentConfig {
  ModelParams params;
  std::vector<Sector> sectors{{0, 1}, {1, 1}, {0, 2}};
  std::vector<Sector> ff_sectors{{0, 0}, {0, 1}, {0, 2}, {1, 2}};
  std::vector<int> cuts;  // empty: every cut 1..M-1
  int solutions_per_sector = 3;
  int z_samples = 5;
  SampleCounts samples;
  Tolerances tol;
  ContinuumConfig continuum;
  Twist probe_twist{{cplx(0.3), cplx(-0.1), cplx(0.2)}};
  Twist generating_twist{{cplx(0.01), cplx(0.02), cplx(-0.015)}};
  double fd_step = 1e-5;
  std::uint64_t seed = 20240611;

  std::vector<int> effective_cuts() const;
  std::vector<cplx> z_points() const;
  // Throws Error(config) on any invariant violation.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::ordered_json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

enum class CheckStatus { pass, fail, blocked };
const char* to_string(CheckStatus s);

struct CheckRecord {
  std::string suite;
  std::string name;
  std::string inputs;
  std::string digest;  // FNV-1a of the inputs and the config
  CheckStatus status = CheckStatus::fail;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string message;
  std::vector<std::pair<std::string, cplx>> values;
  double wall_ms = 0.0;
};

struct CheckReport {
  int schema = 1;
  nlohmann::ordered_json config;
  nlohmann::ordered_json conventions;
  std::vector<CheckRecord> checks;

  int count(CheckStatus s) const;
  bool all_pass() const;
};

const std::vector<std::string>& suite_names();
// Named suites plus their dependencies, in execution order.
std::vector<std::string> resolve_suites(const std::vector<std::string>& requested);

struct RunOptions {
  unsigned threads = 1;
};

CheckReport run(const ExperimentConfig& cfg, const std::vector<std::string>& suites,
                const RunOptions& opts = {});

nlohmann::ordered_json report_to_json(const CheckReport& r);
CheckReport report_from_json(const nlohmann::ordered_json& j);
// JSON with insertion-ordered keys and every floating value in %.16e.
std::string emit_json(const CheckReport& r);
std::string emit_text(const CheckReport& r);
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

struct ReportDiff {
  std::vector<std::string> lines;
  bool identical = true;
};
// Compares value fields (status, residual, tolerance, values); timing is ignored.
ReportDiff diff_reports(const CheckReport& a, const CheckReport& b);

// Thread cap from BETHE_FORGE_THREADS (default: hardware concurrency).
unsigned thread_cap_from_env();

}  // namespace bethe
