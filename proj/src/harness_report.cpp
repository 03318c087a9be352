#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "bethe/error.hpp"
#include "bethe/harness.hpp"

namespace bethe {

using nlohmann::ordered_json;

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "\"NaN\"";
  if (std::isinf(x)) return x > 0 ? "\"Infinity\"" : "\"-Infinity\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void dump_into(const ordered_json& j, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += ordered_json(item.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(item.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(v, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case ordered_json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

ordered_json complex_json(cplx z) { return ordered_json{{"re", z.real()}, {"im", z.imag()}}; }

double number_from(const ordered_json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "NaN") return std::nan("");
    if (s == "Infinity") return INFINITY;
    if (s == "-Infinity") return -INFINITY;
    throw Error(ErrorKind::validation, "unexpected numeric string '" + s + "'");
  }
  return j.get<double>();
}

CheckStatus status_from(const std::string& s) {
  if (s == "pass") return CheckStatus::pass;
  if (s == "fail") return CheckStatus::fail;
  if (s == "blocked") return CheckStatus::blocked;
  throw Error(ErrorKind::validation, "unknown check status '" + s + "'");
}

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::blocked:
      return "blocked";
  }
  return "?";
}

int CheckReport::count(CheckStatus s) const {
  int n = 0;
  for (const auto& c : checks) n += c.status == s ? 1 : 0;
  return n;
}

bool CheckReport::all_pass() const { return count(CheckStatus::pass) == static_cast<int>(checks.size()); }

std::string dump_json(const ordered_json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  return out;
}

ordered_json report_to_json(const CheckReport& r) {
  ordered_json j;
  j["schema"] = r.schema;
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json rec;
    rec["suite"] = c.suite;
    rec["name"] = c.name;
    rec["inputs"] = c.inputs;
    rec["digest"] = c.digest;
    rec["status"] = to_string(c.status);
    rec["residual"] = c.residual;
    rec["tolerance"] = c.tolerance;
    rec["message"] = c.message;
    ordered_json values = ordered_json::array();
    for (const auto& [name, z] : c.values) values.push_back({{"name", name}, {"value", complex_json(z)}});
    rec["values"] = values;
    rec["wall_ms"] = c.wall_ms;
    checks.push_back(rec);
  }
  j["checks"] = checks;
  j["summary"] = {{"total", static_cast<int>(r.checks.size())},
                  {"pass", r.count(CheckStatus::pass)},
                  {"fail", r.count(CheckStatus::fail)},
                  {"blocked", r.count(CheckStatus::blocked)},
                  {"all_pass", r.all_pass()}};
  j["conventions"] = r.conventions.is_null() ? ordered_json::object() : r.conventions;
  j["config"] = r.config.is_null() ? ordered_json::object() : r.config;
  return j;
}

CheckReport report_from_json(const ordered_json& j) {
  CheckReport r;
  try {
    r.schema = j.at("schema").get<int>();
    if (r.schema != 1) throw Error(ErrorKind::validation, "unsupported report schema " + std::to_string(r.schema));
    for (const auto& rec : j.at("checks")) {
      CheckRecord c;
      c.suite = rec.at("suite").get<std::string>();
      c.name = rec.at("name").get<std::string>();
      c.inputs = rec.at("inputs").get<std::string>();
      c.digest = rec.at("digest").get<std::string>();
      c.status = status_from(rec.at("status").get<std::string>());
      c.residual = number_from(rec.at("residual"));
      c.tolerance = number_from(rec.at("tolerance"));
      c.message = rec.at("message").get<std::string>();
      for (const auto& v : rec.at("values"))
        c.values.emplace_back(v.at("name").get<std::string>(),
                              cplx(number_from(v.at("value").at("re")), number_from(v.at("value").at("im"))));
      c.wall_ms = number_from(rec.at("wall_ms"));
      r.checks.push_back(std::move(c));
    }
    if (j.contains("conventions")) r.conventions = j.at("conventions");
    if (j.contains("config")) r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::validation, std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string emit_json(const CheckReport& r) { return dump_json(report_to_json(r)) + "\n"; }

std::string emit_text(const CheckReport& r) {
  std::size_t width = 5;
  for (const auto& c : r.checks) width = std::max(width, c.name.size());
  std::ostringstream os;
  os << std::left << std::setw(8) << "STATUS" << std::setw(static_cast<int>(width) + 2) << "CHECK" << std::right
     << std::setw(11) << "RESIDUAL" << std::setw(11) << "TOL" << std::setw(10) << "MS"
     << "\n";
  for (const auto& c : r.checks) {
    std::string st = to_string(c.status);
    for (auto& ch : st) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    os << std::left << std::setw(8) << st << std::setw(static_cast<int>(width) + 2) << c.name << std::right
       << std::setw(11) << sci(c.residual) << std::setw(11) << sci(c.tolerance) << std::setw(10) << std::fixed
       << std::setprecision(1) << c.wall_ms << std::defaultfloat;
    if (c.status != CheckStatus::pass && !c.message.empty()) os << "  " << c.message;
    os << "\n";
  }
  os << "summary: " << r.count(CheckStatus::pass) << "/" << r.checks.size() << " pass, "
     << r.count(CheckStatus::fail) << " fail, " << r.count(CheckStatus::blocked) << " blocked\n";
  return os.str();
}

ReportDiff diff_reports(const CheckReport& a, const CheckReport& b) {
  ReportDiff d;
  auto key = [](const CheckRecord& c) { return c.suite + "/" + c.name; };
  std::map<std::string, const CheckRecord*> rb;
  for (const auto& c : b.checks) rb[key(c)] = &c;
  std::map<std::string, bool> seen;
  auto add = [&](const std::string& line) {
    d.lines.push_back(line);
    d.identical = false;
  };
  for (const auto& ca : a.checks) {
    const std::string k = key(ca);
    seen[k] = true;
    const auto it = rb.find(k);
    if (it == rb.end()) {
      add("- " + k + " only in first report");
      continue;
    }
    const CheckRecord& cb = *it->second;
    if (ca.status != cb.status)
      add("~ " + k + " status " + to_string(ca.status) + " -> " + to_string(cb.status));
    if (!same_number(ca.residual, cb.residual))
      add("~ " + k + " residual " + format_double(ca.residual) + " -> " + format_double(cb.residual));
    if (!same_number(ca.tolerance, cb.tolerance))
      add("~ " + k + " tolerance " + format_double(ca.tolerance) + " -> " + format_double(cb.tolerance));
    if (ca.inputs != cb.inputs) add("~ " + k + " inputs differ");
    bool values_equal = ca.values.size() == cb.values.size();
    for (std::size_t i = 0; values_equal && i < ca.values.size(); ++i)
      values_equal = ca.values[i].first == cb.values[i].first &&
                     same_number(ca.values[i].second.real(), cb.values[i].second.real()) &&
                     same_number(ca.values[i].second.imag(), cb.values[i].second.imag());
    if (!values_equal) add("~ " + k + " values differ");
  }
  for (const auto& cb : b.checks)
    if (!seen.count(key(cb))) add("+ " + key(cb) + " only in second report");
  return d;
}

unsigned thread_cap_from_env() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const char* env = std::getenv("BETHE_FORGE_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw Error(ErrorKind::config, std::string("BETHE_FORGE_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<unsigned>(std::min<long>(v, 256));
}

}  // namespace bethe
