#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "entroflow/geometry.hpp"

namespace entroflow {

// Flat key/value text. `[section]` headers prefix the keys that follow, so
//   [metric]
//   profile = "plummer"
// and `metric.profile = "plummer"` are the same entry. Arrays are inline.
using ConfigValue = std::variant<bool, double, std::string, std::vector<double>>;

class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, ConfigValue>& values() const { return values_; }
  const std::string& text() const { return text_; }

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> array(const std::string& key) const;  // empty when absent

  void set(const std::string& key, ConfigValue v) { values_[key] = std::move(v); }

 private:
  std::map<std::string, ConfigValue> values_;
  std::string text_;
};

const std::vector<std::string>& experiment_kinds();

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  long estimated_steps = 0;   // flow steps, 0 for static kinds
  long estimated_work = 0;    // grid nodes x steps
  bool ok() const { return errors.empty(); }
};

// Dry run: schema, kind-specific keys, tolerances and the CFL bound.
ValidationReport validate_config(const Config& cfg);

WarpedMetric metric_from_config(const Config& cfg);

struct RunOptions {
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<long> checkpoint_every;
};

struct RunSummary {
  std::vector<std::filesystem::path> files;  // relative to out
  std::string headline;                      // one-line result for the terminal
};

// Runs one experiment. Outputs are staged and moved into `out` only on
// success. Throws Error(Usage) for config problems before touching disk.
RunSummary run_experiment(const Config& cfg, const RunOptions& opt);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& p);

}  // namespace entroflow
