#include "entroflow/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "entroflow/error.hpp"
#include "entroflow/flow.hpp"
#include "entroflow/profiles.hpp"

namespace entroflow {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Usage, "config line " + std::to_string(line) + ": " + msg);
}

std::optional<double> to_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

// drops a trailing comment that is not inside quotes
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_value(const std::string& raw, std::size_t line) {
  if (raw.empty()) bad(line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') bad(line, "unterminated string");
    const std::string body = raw.substr(1, raw.size() - 2);
    if (body.find('"') != std::string::npos) bad(line, "stray quote in string");
    return body;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') bad(line, "unterminated array");
    std::vector<double> out;
    const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
    if (body.empty()) return out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto v = to_number(trim(item));
      if (!v) bad(line, "array entries must be numbers: '" + trim(item) + "'");
      out.push_back(*v);
    }
    if (body.back() == ',') bad(line, "trailing comma in array");
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (auto v = to_number(raw)) return *v;
  // bare words are strings (profile = flat)
  if (std::all_of(raw.begin(), raw.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
               c == '.' || c == '/';
      }))
    return raw;
  bad(line, "cannot parse value '" + raw + "'");
}

const char* type_name(const ConfigValue& v) {
  switch (v.index()) {
    case 0: return "bool";
    case 1: return "number";
    case 2: return "string";
    default: return "array";
  }
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  cfg.text_ = std::string(text);
  std::string section;
  std::istringstream in(cfg.text_);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[' && s.find('=') == std::string::npos) {
      if (s.back() != ']') bad(line, "unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!valid_key(section)) bad(line, "bad section name '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    std::string key = trim(std::string_view(s).substr(0, eq));
    if (!valid_key(key)) bad(line, "bad key '" + key + "'");
    if (!section.empty()) key = section + "." + key;
    if (cfg.values_.count(key)) bad(line, "duplicate key '" + key + "'");
    cfg.values_[key] = parse_value(trim(std::string_view(s).substr(eq + 1)), line);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Usage, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

double Config::number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorKind::Usage, "missing key " + key);
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  throw Error(ErrorKind::Usage, key + " must be a number");
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Config::integer(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    throw Error(ErrorKind::Usage, key + " must be an integer");
  return static_cast<long>(v);
}

std::string Config::string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorKind::Usage, "missing key " + key);
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error(ErrorKind::Usage, key + " must be a string");
}

std::string Config::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto* b = std::get_if<bool>(&it->second)) return *b;
  throw Error(ErrorKind::Usage, key + " must be true or false");
}

std::vector<double> Config::array(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return {};
  if (auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
  if (auto* d = std::get_if<double>(&it->second)) return {*d};
  throw Error(ErrorKind::Usage, key + " must be an array of numbers");
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"lambda",        "lambda-infinity", "flow",
                                          "entropy-audit", "breather-check",  "noncollapse"};
  return k;
}

namespace {

enum class T { Num, Int, Str, Bool, Arr };

struct KeySpec {
  const char* key;
  T type;
  const char* kinds;  // "*" or space separated
};

// clang-format off
const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s{
      {"kind", T::Str, "*"},
      {"seed", T::Int, "*"},
      {"out", T::Str, "*"},
      {"metric.profile", T::Str, "*"},
      {"metric.n", T::Int, "*"},
      {"metric.extent", T::Num, "*"},
      {"metric.cells", T::Int, "*"},
      {"metric.mass", T::Num, "*"},
      {"metric.core", T::Num, "*"},
      {"metric.width", T::Num, "*"},
      {"metric.tau", T::Num, "*"},
      {"metric.delta", T::Num, "*"},
      {"metric.a", T::Num, "*"},
      {"metric.c", T::Num, "*"},
      {"metric.k", T::Num, "*"},
      {"metric.power", T::Num, "*"},
      {"metric.path", T::Str, "*"},
      {"metric.scale", T::Num, "*"},
      {"schedule.alphas", T::Arr, "lambda lambda-infinity breather-check noncollapse"},
      {"schedule.radii", T::Arr, "lambda lambda-infinity breather-check noncollapse"},
      {"schedule.tolerances", T::Arr, "lambda lambda-infinity breather-check noncollapse"},
      {"minimizer.tolerance", T::Num, "lambda lambda-infinity breather-check noncollapse entropy-audit"},
      {"minimizer.max_iterations", T::Int, "lambda lambda-infinity breather-check noncollapse entropy-audit"},
      {"minimizer.initial_step", T::Num, "lambda lambda-infinity breather-check noncollapse entropy-audit"},
      {"flow.T", T::Num, "flow entropy-audit breather-check noncollapse"},
      {"flow.dt", T::Num, "flow entropy-audit breather-check noncollapse"},
      {"flow.every", T::Int, "flow entropy-audit breather-check noncollapse"},
      {"flow.snapshots", T::Bool, "flow"},
      {"heat.substeps", T::Int, "entropy-audit breather-check"},
      {"heat.startup", T::Int, "entropy-audit breather-check"},
      {"heat.max_drift", T::Num, "entropy-audit breather-check"},
      {"heat.t1", T::Num, "entropy-audit"},
      {"heat.t2", T::Num, "entropy-audit"},
      {"heat.final", T::Str, "entropy-audit"},
      {"heat.scale", T::Num, "entropy-audit"},
      {"breather.t1", T::Num, "breather-check"},
      {"breather.t2", T::Num, "breather-check"},
      {"breather.lambda_tol", T::Num, "breather-check"},
      {"breather.align_tol", T::Num, "breather-check"},
      {"noncollapse.centers", T::Arr, "noncollapse"},
      {"noncollapse.radii", T::Arr, "noncollapse"},
      {"noncollapse.lambda", T::Bool, "noncollapse"},
      {"noncollapse.sobolev_factor", T::Num, "noncollapse"},
      {"noncollapse.kappa_factor", T::Num, "noncollapse"},
  };
  return s;
}
// clang-format on

bool allowed_for(const KeySpec& k, const std::string& kind) {
  if (std::string_view(k.kinds) == "*") return true;
  std::istringstream ss(k.kinds);
  std::string w;
  while (ss >> w)
    if (w == kind) return true;
  return false;
}

const std::set<std::string> kProfiles{"flat",       "sphere_cap", "cylinder", "plummer",
                                      "bump",       "power_tail", "deep_well", "csv"};

void check_positive(const Config& cfg, const std::string& key, ValidationReport& rep) {
  if (!cfg.has(key)) return;
  for (double v : cfg.array(key))
    if (!(v > 0.0)) rep.errors.push_back(key + " must be > 0");
}

}  // namespace

ValidationReport validate_config(const Config& cfg) {
  ValidationReport rep;
  std::string kind;
  try {
    kind = cfg.string("kind");
  } catch (const Error& e) {
    rep.errors.push_back(e.what());
    return rep;
  }
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    rep.errors.push_back("unknown kind '" + kind + "'");
    return rep;
  }

  for (const auto& [key, value] : cfg.values()) {
    auto it = std::find_if(schema().begin(), schema().end(),
                           [&](const KeySpec& s) { return key == s.key; });
    if (it == schema().end()) {
      rep.errors.push_back("unknown key " + key);
      continue;
    }
    if (!allowed_for(*it, kind)) {
      rep.errors.push_back("key " + key + " does not apply to kind " + kind);
      continue;
    }
    const bool num = std::holds_alternative<double>(value);
    bool ok = false;
    switch (it->type) {
      case T::Num: ok = num; break;
      case T::Int: ok = num && std::get<double>(value) == std::floor(std::get<double>(value)); break;
      case T::Str: ok = std::holds_alternative<std::string>(value); break;
      case T::Bool: ok = std::holds_alternative<bool>(value); break;
      case T::Arr: ok = num || std::holds_alternative<std::vector<double>>(value); break;
    }
    if (!ok) rep.errors.push_back(key + " has the wrong type (" + type_name(value) + ")");
  }
  if (!rep.errors.empty()) return rep;

  if (!cfg.has("metric.profile")) {
    rep.errors.push_back("missing metric.profile");
  } else if (!kProfiles.count(cfg.string("metric.profile"))) {
    rep.errors.push_back("unknown metric.profile '" + cfg.string("metric.profile") + "'");
  } else if (cfg.string("metric.profile") == "csv" && !cfg.has("metric.path")) {
    rep.errors.push_back("metric.profile = csv needs metric.path");
  }
  for (const char* k : {"minimizer.tolerance", "schedule.tolerances", "heat.max_drift",
                        "breather.lambda_tol", "breather.align_tol", "metric.extent",
                        "metric.scale", "flow.T", "schedule.radii", "noncollapse.radii",
                        "heat.scale", "noncollapse.sobolev_factor", "noncollapse.kappa_factor"})
    check_positive(cfg, k, rep);
  for (double a : cfg.array("schedule.alphas"))
    if (!(a >= 1.0)) rep.errors.push_back("schedule.alphas entries must be >= 1");
  const bool needs_flow = kind == "flow" || kind == "entropy-audit" || kind == "breather-check";
  if (needs_flow && !cfg.has("flow.T")) rep.errors.push_back("missing flow.T");
  if (kind == "breather-check")
    for (const char* k : {"breather.t1", "breather.t2"})
      if (!cfg.has(k)) rep.errors.push_back(std::string("missing ") + k);
  if ((kind == "lambda" || kind == "lambda-infinity") && !cfg.has("schedule.radii"))
    rep.errors.push_back("missing schedule.radii");
  if (kind == "entropy-audit") {
    const auto f = cfg.string("heat.final", "gaussian");
    if (f != "gaussian" && f != "minimizer")
      rep.errors.push_back("heat.final must be gaussian or minimizer");
  }
  if (cfg.has("metric.cells") && cfg.integer("metric.cells", 0) < 16)
    rep.errors.push_back("metric.cells must be at least 16");
  if (!rep.errors.empty()) return rep;

  // resource estimate needs the actual grid
  try {
    const auto g = metric_from_config(cfg);
    const double bound = flow_step_bound(g);
    if (cfg.has("flow.T")) {
      const double dt = cfg.number("flow.dt", 0.0) > 0.0 ? cfg.number("flow.dt")
                                                         : 0.2 * g.min_ds() * g.min_ds();
      if (dt > bound) {
        std::ostringstream w;
        w << std::setprecision(6) << "flow.dt = " << dt << " exceeds the stability bound "
          << bound << " = 0.25 (min ds)^2";
        rep.warnings.push_back(w.str());
      }
      rep.estimated_steps = static_cast<long>(std::ceil(cfg.number("flow.T") / dt));
    }
    rep.estimated_work = static_cast<long>(g.size()) * std::max(1L, rep.estimated_steps);
    for (const char* k : {"schedule.radii", "noncollapse.radii"})
      for (double r : cfg.array(k))
        if (r > g.total_arclength())
          rep.errors.push_back(std::string(k) + " entry exceeds the grid arclength");
  } catch (const Error& e) {
    rep.errors.push_back(e.what());
  }
  return rep;
}

WarpedMetric metric_from_config(const Config& cfg) {
  const std::string p = cfg.string("metric.profile");
  const int n = static_cast<int>(cfg.integer("metric.n", 3));
  const double extent = cfg.number("metric.extent", 20.0);
  const auto cells = static_cast<std::size_t>(cfg.integer("metric.cells", 1000));
  std::optional<WarpedMetric> g;
  if (p == "flat") {
    g = profiles::flat(n, extent, cells);
  } else if (p == "sphere_cap") {
    g = profiles::sphere_cap(n, cfg.number("metric.extent", 2.5), cells);
  } else if (p == "cylinder") {
    g = profiles::cylinder_like(n, extent, cells);
  } else if (p == "plummer") {
    g = profiles::plummer(n, cfg.number("metric.mass", 1.0), cfg.number("metric.core", 1.0),
                          extent, cells);
  } else if (p == "bump") {
    g = profiles::gaussian_bump(n, cfg.number("metric.mass", 1.0), cfg.number("metric.width", 1.0),
                                extent, cells);
  } else if (p == "power_tail") {
    g = profiles::power_tail(n, cfg.number("metric.tau", 2.0), extent, cells);
  } else if (p == "deep_well") {
    profiles::DeepWell w;
    w.delta = cfg.number("metric.delta", w.delta);
    w.a = cfg.number("metric.a", w.a);
    w.c = cfg.number("metric.c", w.c);
    w.k = cfg.number("metric.k", w.k);
    w.power = cfg.number("metric.power", w.power);
    g = profiles::deep_well(n, w, extent, cells);
  } else if (p == "csv") {
    std::ifstream f(cfg.string("metric.path"));
    require(static_cast<bool>(f), ErrorKind::InvalidInput,
            "cannot read metric file " + cfg.string("metric.path"));
    g = read_metric_csv(f, n);
  } else {
    throw Error(ErrorKind::Usage, "unknown metric.profile '" + p + "'");
  }
  if (cfg.has("metric.scale")) return scale_metric(*g, cfg.number("metric.scale"));
  return *g;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1,
          ErrorKind::NumericalInconsistency, "sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace entroflow
