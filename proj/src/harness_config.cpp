#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bethe/error.hpp"
#include "bethe/harness.hpp"

namespace bethe {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::config, what); }

void check_keys(const ordered_json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) config_error("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void read(const ordered_json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(where + "." + key + " has the wrong type");
  }
}

std::vector<Sector> read_sectors(const ordered_json& j, const char* key, const std::string& where,
                                 const std::vector<Sector>& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array()) config_error(where + "." + key + " must be a list of [a, b] pairs");
  std::vector<Sector> out;
  for (const auto& s : arr) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer())
      config_error(where + "." + key + " entries must be [a, b] integer pairs");
    out.emplace_back(s[0].get<int>(), s[1].get<int>());
  }
  return out;
}

Twist read_twist(const ordered_json& j, const char* key, const Twist& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 3) config_error(std::string("twist.") + key + " must hold three numbers");
  Twist t;
  for (std::size_t k = 0; k < 3; ++k) {
    if (!arr[k].is_number()) config_error(std::string("twist.") + key + " must hold three numbers");
    t.beta[k] = arr[k].get<double>();
  }
  return t;
}

ordered_json sectors_json(const std::vector<Sector>& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& [a, b] : v) arr.push_back({a, b});
  return arr;
}

ordered_json twist_json(const Twist& t) {
  return ordered_json::array({t.beta[0].real(), t.beta[1].real(), t.beta[2].real()});
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

void check_sector_list(const std::vector<Sector>& sectors, const ModelParams& p, const std::string& what) {
  std::set<Sector> seen;
  for (const auto& [a, b] : sectors) {
    const std::string tag = what + " (" + std::to_string(a) + "," + std::to_string(b) + ")";
    if (a < 0 || b < 0) config_error(tag + ": negative particle numbers");
    if (a > b) config_error(tag + ": a > b has no Bethe vectors");
    if (p.max_particles < b + 2)
      config_error(tag + " needs max_particles >= " + std::to_string(b + 2) + ", got " +
                   std::to_string(p.max_particles));
    if (!seen.insert({a, b}).second) config_error(tag + " is listed twice");
  }
}

}  // namespace

std::vector<int> ExperimentConfig::effective_cuts() const {
  if (!cuts.empty()) return cuts;
  std::vector<int> out;
  for (int m = 1; m < params.sites; ++m) out.push_back(m);
  return out;
}

std::vector<cplx> ExperimentConfig::z_points() const {
  std::vector<cplx> zs = default_z_samples();
  for (int k = static_cast<int>(zs.size()); k < z_samples; ++k) zs.emplace_back(-2.3 + 0.61 * k, 0.05 * (k % 3));
  zs.resize(static_cast<std::size_t>(z_samples));
  return zs;
}

void ExperimentConfig::validate() const {
  try {
    params.validate();
  } catch (const Error& e) {
    config_error(std::string("model: ") + e.what());
  }
  const std::size_t limit = FockSpace::default_dim_limit;
  const auto dim_of = [](int sites, int n) { return binomial(n + 2 * sites, 2 * sites); };
  if (dim_of(params.sites, params.max_particles) > limit) config_error("model: Fock dimension exceeds the bound");
  if (params.sites % 2 == 1 && dim_of(params.sites + 1, params.max_particles) > limit)
    config_error("model: Fock dimension of the even companion chain exceeds the bound");
  check_sector_list(sectors, params, "sector");
  check_sector_list(ff_sectors, params, "ff sector");
  std::set<int> seen;
  for (int m : cuts) {
    if (m < 1 || m >= params.sites)
      config_error("cut " + std::to_string(m) + " outside 1.." + std::to_string(params.sites - 1));
    if (!seen.insert(m).second) config_error("cut " + std::to_string(m) + " is listed twice");
  }
  if (z_samples < 1 || z_samples > 32) config_error("z_samples must lie in 1..32");
  if (solutions_per_sector < 1) config_error("solutions_per_sector must be positive");
  if (samples.rtt_pairs < 1 || samples.yang_baxter_triples < 1 || samples.vacuum_points < 1 ||
      samples.eigen_points < 1)
    config_error("sample counts must be positive");
  for (double t : {tol.onshell, tol.identity, tol.exact, tol.eigen, tol.annihilation, tol.limit, tol.form_factor,
                   tol.generating, tol.derivative, tol.continuum})
    if (!(t > 0.0) || !std::isfinite(t)) config_error("tolerances must be positive and finite");
  if (!(fd_step > 0.0)) config_error("twist.fd_step must be positive");

  const ContinuumConfig& cc = continuum;
  if (!(cc.length > 0.0)) config_error("continuum.length must be positive");
  if (cc.delta_sequence.size() < 3) config_error("continuum.delta_sequence needs at least three spacings");
  for (std::size_t k = 0; k < cc.delta_sequence.size(); ++k) {
    const double d = cc.delta_sequence[k];
    if (!(d > 0.0)) config_error("continuum.delta_sequence entries must be positive");
    if (k > 0 && std::abs(cc.delta_sequence[k - 1] / d - 2.0) > 1e-12)
      config_error("continuum.delta_sequence must halve at every step");
    const double sites = cc.length / d;
    if (!near_integer(sites) || sites < 2) config_error("continuum: length / spacing must be an integer >= 2");
    const double n = cc.x_fraction * cc.length / d;
    if (!near_integer(n) || std::round(n) < 1 || std::round(n) >= std::round(sites))
      config_error("continuum: x must be an interior lattice bond for every spacing");
    if (dim_of(static_cast<int>(std::round(sites)), cc.max_particles) > limit)
      config_error("continuum: Fock dimension exceeds the bound");
  }
  if (cc.max_particles < 2) config_error("continuum.max_particles must be at least 2");
  if (!(cc.rate_min < cc.rate_max)) config_error("continuum.rate_min must be below rate_max");
}

ExperimentConfig parse_config(const ordered_json& j) {
  ExperimentConfig cfg;
  check_keys(j, "config",
             {"schema", "model", "sectors", "ff_sectors", "cuts", "z_samples", "solutions_per_sector", "samples",
              "continuum", "twist", "tolerances", "seed"});
  int schema = 1;
  read(j, "schema", schema, "config");
  if (schema != 1) config_error("unsupported config schema " + std::to_string(schema));
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "model", {"sites", "spacing", "coupling", "max_particles"});
    read(m, "sites", cfg.params.sites, "model");
    read(m, "spacing", cfg.params.spacing, "model");
    read(m, "coupling", cfg.params.coupling, "model");
    read(m, "max_particles", cfg.params.max_particles, "model");
  }
  cfg.sectors = read_sectors(j, "sectors", "config", cfg.sectors);
  cfg.ff_sectors = read_sectors(j, "ff_sectors", "config", cfg.ff_sectors);
  read(j, "cuts", cfg.cuts, "config");
  read(j, "z_samples", cfg.z_samples, "config");
  read(j, "solutions_per_sector", cfg.solutions_per_sector, "config");
  if (j.contains("samples")) {
    const auto& s = j.at("samples");
    check_keys(s, "samples", {"rtt_pairs", "yang_baxter_triples", "vacuum_points", "eigen_points"});
    read(s, "rtt_pairs", cfg.samples.rtt_pairs, "samples");
    read(s, "yang_baxter_triples", cfg.samples.yang_baxter_triples, "samples");
    read(s, "vacuum_points", cfg.samples.vacuum_points, "samples");
    read(s, "eigen_points", cfg.samples.eigen_points, "samples");
  }
  if (j.contains("continuum")) {
    const auto& c = j.at("continuum");
    check_keys(c, "continuum", {"length", "delta_sequence", "x_fraction", "max_particles", "rate_min", "rate_max"});
    read(c, "length", cfg.continuum.length, "continuum");
    read(c, "delta_sequence", cfg.continuum.delta_sequence, "continuum");
    read(c, "x_fraction", cfg.continuum.x_fraction, "continuum");
    read(c, "max_particles", cfg.continuum.max_particles, "continuum");
    read(c, "rate_min", cfg.continuum.rate_min, "continuum");
    read(c, "rate_max", cfg.continuum.rate_max, "continuum");
  }
  if (j.contains("twist")) {
    const auto& t = j.at("twist");
    check_keys(t, "twist", {"probe", "generating", "fd_step"});
    cfg.probe_twist = read_twist(t, "probe", cfg.probe_twist);
    cfg.generating_twist = read_twist(t, "generating", cfg.generating_twist);
    read(t, "fd_step", cfg.fd_step, "twist");
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    check_keys(t, "tolerances",
               {"tol_onshell", "tol_identity", "tol_exact", "tol_eigen", "tol_annihilation", "tol_limit",
                "tol_form_factor", "tol_generating", "tol_derivative", "tol_continuum"});
    read(t, "tol_onshell", cfg.tol.onshell, "tolerances");
    read(t, "tol_identity", cfg.tol.identity, "tolerances");
    read(t, "tol_exact", cfg.tol.exact, "tolerances");
    read(t, "tol_eigen", cfg.tol.eigen, "tolerances");
    read(t, "tol_annihilation", cfg.tol.annihilation, "tolerances");
    read(t, "tol_limit", cfg.tol.limit, "tolerances");
    read(t, "tol_form_factor", cfg.tol.form_factor, "tolerances");
    read(t, "tol_generating", cfg.tol.generating, "tolerances");
    read(t, "tol_derivative", cfg.tol.derivative, "tolerances");
    read(t, "tol_continuum", cfg.tol.continuum, "tolerances");
  }
  read(j, "seed", cfg.seed, "config");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    config_error("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema"] = 1;
  j["model"] = {{"sites", cfg.params.sites},
                {"spacing", cfg.params.spacing},
                {"coupling", cfg.params.coupling},
                {"max_particles", cfg.params.max_particles}};
  j["sectors"] = sectors_json(cfg.sectors);
  j["ff_sectors"] = sectors_json(cfg.ff_sectors);
  j["cuts"] = cfg.cuts;
  j["z_samples"] = cfg.z_samples;
  j["solutions_per_sector"] = cfg.solutions_per_sector;
  j["samples"] = {{"rtt_pairs", cfg.samples.rtt_pairs},
                  {"yang_baxter_triples", cfg.samples.yang_baxter_triples},
                  {"vacuum_points", cfg.samples.vacuum_points},
                  {"eigen_points", cfg.samples.eigen_points}};
  j["continuum"] = {{"length", cfg.continuum.length},
                    {"delta_sequence", cfg.continuum.delta_sequence},
                    {"x_fraction", cfg.continuum.x_fraction},
                    {"max_particles", cfg.continuum.max_particles},
                    {"rate_min", cfg.continuum.rate_min},
                    {"rate_max", cfg.continuum.rate_max}};
  j["twist"] = {{"probe", twist_json(cfg.probe_twist)},
                {"generating", twist_json(cfg.generating_twist)},
                {"fd_step", cfg.fd_step}};
  j["tolerances"] = {{"tol_onshell", cfg.tol.onshell},
                     {"tol_identity", cfg.tol.identity},
                     {"tol_exact", cfg.tol.exact},
                     {"tol_eigen", cfg.tol.eigen},
                     {"tol_annihilation", cfg.tol.annihilation},
                     {"tol_limit", cfg.tol.limit},
                     {"tol_form_factor", cfg.tol.form_factor},
                     {"tol_generating", cfg.tol.generating},
                     {"tol_derivative", cfg.tol.derivative},
                     {"tol_continuum", cfg.tol.continuum}};
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace bethe
