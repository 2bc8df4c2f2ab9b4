#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace slowfast {

/// Rejected key, malformed value or out-of-range setting.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every setting of one CLI invocation. Defaults here are the documented
/// defaults; `explicit_keys` records which ones were set by a file or flag.
struct ExperimentConfig {
  std::string command;
  std::string check;

  double a = 1.0;
  std::int64_t n = 2000;
  double z0 = 1.0 / 54.0;
  double t_final = 1.0;
  double dt = 1e-4;
  std::int64_t runs = 1;
  std::int64_t paths = 100;
  std::uint64_t seed = 1;
  std::vector<double> obs_times;
  std::int64_t z_grid = 64;
  std::int64_t threads = 0;
  std::string format = "csv";
  std::string out;
  std::string init = "center";
  std::vector<std::int64_t> counts;
  bool compare = false;
  std::int64_t bins = 30;
  double burn_in = 50.0;
  double horizon = 500.0;
  bool deterministic = false;

  std::set<std::string> explicit_keys;

  bool is_explicit(const std::string& key) const { return explicit_keys.count(key) > 0; }

  /// Sorted key=value lines, one per setting, preceded by command and check.
  std::string canonical() const;
  /// The same settings as (key, value) pairs.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

struct ConfigKey {
  std::string key;
  std::string help;
};

/// All recognised keys in sorted order.
const std::vector<ConfigKey>& config_keys();

/// Parses `value` into the setting named `key`. Throws ConfigError naming
/// the key for unknown keys or malformed values.
void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Reads `key = value` lines; '#' starts a comment, blank lines are skipped.
/// Throws ConfigError for unknown keys and malformed values, std::ios_base::failure
/// when the file cannot be read.
ExperimentConfig config_from_file(const std::string& path, ExperimentConfig base = {});

/// Range checks shared by every subcommand.
void validate(const ExperimentConfig& cfg);

}  // namespace slowfast
