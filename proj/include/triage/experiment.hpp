#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace triage {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration: '#' comments, later keys win, CLI overrides
// applied on top. Typed getters fail fatally naming the offending key.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void apply_override(const std::string& assignment);  // "key=value"

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  double real_or(const std::string& key, double fallback) const;
  std::int64_t int_or(const std::string& key, std::int64_t fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;

  std::string canonical() const;    // sorted "key=value" lines
  std::string hash() const;         // FNV-1a of canonical(), hex
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct ExperimentReport {
  std::string kind;
  std::string out_dir;
  std::vector<std::string> tables;                 // files written
  std::map<std::string, double> wall_clock_ms;     // per stage
  std::string manifest_path;
};

// Runs the experiment named by the "experiment" key; writes CSV tables and
// manifest.json into "out.dir". Kinds: rate_sweep, algorithm_matrix,
// order_compare, loss_curve, timing, order_cv, top_node.
ExperimentReport run_experiment(const Config& config);

}  // namespace triage
