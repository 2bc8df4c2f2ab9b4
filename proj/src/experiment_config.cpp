#include "slowfast_lv/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace slowfast {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("malformed value for '" + key + "': '" + raw + "'");
  }
  return value;
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  // Fractions like 1/54 are accepted for level values.
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double num = parse_number<double>(key, text.substr(0, slash));
    const double den = parse_number<double>(key, text.substr(slash + 1));
    if (den == 0.0) {
      throw ConfigError("malformed value for '" + key + "': division by zero");
    }
    return num / den;
  }
  return parse_number<double>(key, text);
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("malformed value for '" + key + "': expected true or false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& raw, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) {
      out.push_back(parse(key, item));
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

struct Field {
  ConfigKey info;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SLOWFAST_DOUBLE(name, member, help)                                        \
  Field {                                                                          \
    {name, help},                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(name, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.member); }                    \
  }
#define SLOWFAST_INT(name, member, type, help)                                     \
  Field {                                                                          \
    {name, help},                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_number<type>(name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }         \
  }
#define SLOWFAST_BOOL(name, member, help)                                          \
  Field {                                                                          \
    {name, help},                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(name, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }
#define SLOWFAST_STRING(name, member, help)                                        \
  Field {                                                                          \
    {name, help}, [](ExperimentConfig& c, const std::string& v) { c.member = trim(v); }, \
        [](const ExperimentConfig& c) { return c.member; }                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t{
        SLOWFAST_DOUBLE("a", a, "intrinsic rate a >= 0 (default 1)"),
        SLOWFAST_INT("bins", bins, std::int64_t, "equal-mass bins for TV distances (default 30)"),
        SLOWFAST_DOUBLE("burn-in", burn_in, "SDE burn-in time before occupation sampling (default 50)"),
        SLOWFAST_BOOL("compare", compare, "stationary: emit the three-way comparison (default false)"),
        Field{{"counts", "initial counts n1,n2,n3 for --init counts"},
              [](ExperimentConfig& c, const std::string& v) {
                c.counts = parse_list<std::int64_t>("counts", v, [](const std::string& k, const std::string& x) {
                  return parse_number<std::int64_t>(k, x);
                });
              },
              [](const ExperimentConfig& c) { return join(c.counts); }},
        SLOWFAST_BOOL("deterministic", deterministic, "omit the timestamp from output headers (default false)"),
        SLOWFAST_DOUBLE("dt", dt, "Euler-Maruyama step (default 1e-4)"),
        SLOWFAST_STRING("format", format, "csv or json (default csv)"),
        SLOWFAST_DOUBLE("horizon", horizon, "SDE occupation horizon after burn-in (default 500)"),
        SLOWFAST_STRING("init", init, "particle start: center or counts (default center)"),
        SLOWFAST_INT("n", n, std::int64_t, "population size N (default 2000)"),
        Field{{"obs-times", "comma-separated observation times (default: evenly spaced)"},
              [](ExperimentConfig& c, const std::string& v) {
                c.obs_times = parse_list<double>("obs-times", v, parse_double);
              },
              [](const ExperimentConfig& c) { return join(c.obs_times); }},
        SLOWFAST_STRING("out", out, "output path (default: standard output)"),
        SLOWFAST_INT("paths", paths, std::int64_t, "SDE paths (default 100)"),
        SLOWFAST_INT("runs", runs, std::int64_t, "particle runs (default 1)"),
        SLOWFAST_INT("seed", seed, std::uint64_t, "master seed (default 1)"),
        SLOWFAST_DOUBLE("t-final", t_final, "final time (default 1)"),
        SLOWFAST_INT("threads", threads, std::int64_t, "worker threads, 0 = all cores (default 0)"),
        SLOWFAST_DOUBLE("z0", z0, "initial level in (0, 1/27) (default 1/54)"),
        SLOWFAST_INT("z-grid", z_grid, std::int64_t, "number of interior levels (default 64)"),
    };
    std::sort(t.begin(), t.end(),
              [](const Field& l, const Field& r) { return l.info.key < r.info.key; });
    return t;
  }();
  return table;
}

#undef SLOWFAST_DOUBLE
#undef SLOWFAST_INT
#undef SLOWFAST_BOOL
#undef SLOWFAST_STRING

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.info.key == key) {
      return f;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) {
      k.push_back(f.info);
    }
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  field(key).set(cfg, value);
  cfg.explicit_keys.insert(key);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  return field(key).get(cfg);
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("command", command);
  out.emplace_back("check", check);
  for (const auto& f : fields()) {
    out.emplace_back(f.info.key, f.get(*this));
  }
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries()) {
    out += k + "=" + v + "\n";
  }
  return out;
}

ExperimentConfig config_from_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open config file '" + path + "'");
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.a >= 0.0 && std::isfinite(c.a), "'a' must be a finite value >= 0");
  require(c.n >= 1, "'n' must be >= 1");
  require(c.z0 > 0.0 && c.z0 < 1.0 / 27.0, "'z0' must lie in (0, 1/27)");
  require(c.t_final >= 0.0 && std::isfinite(c.t_final), "'t-final' must be >= 0");
  require(c.dt > 0.0 && std::isfinite(c.dt), "'dt' must be > 0");
  require(c.runs >= 1, "'runs' must be >= 1");
  require(c.paths >= 1, "'paths' must be >= 1");
  require(c.z_grid >= 1, "'z-grid' must be >= 1");
  require(c.threads >= 0, "'threads' must be >= 0");
  require(c.bins >= 1, "'bins' must be >= 1");
  require(c.burn_in >= 0.0, "'burn-in' must be >= 0");
  require(c.horizon > 0.0, "'horizon' must be > 0");
  require(c.format == "csv" || c.format == "json", "'format' must be csv or json");
  require(c.init == "center" || c.init == "counts", "'init' must be center or counts");
  require(std::is_sorted(c.obs_times.begin(), c.obs_times.end()),
          "'obs-times' must be nondecreasing");
  for (double t : c.obs_times) {
    require(t >= 0.0 && t <= c.t_final, "'obs-times' must lie in [0, t-final]");
  }
  if (c.init == "counts") {
    require(c.counts.size() == 3, "'counts' needs three values n1,n2,n3");
    for (auto k : c.counts) {
      require(k >= 0, "'counts' must be nonnegative");
    }
  }
}

}  // namespace slowfast
