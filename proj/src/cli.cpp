#include "slowfast_lv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slowfast_lv/analysis.hpp"
#include "slowfast_lv/averaged_sde.hpp"
#include "slowfast_lv/fast_dynamics.hpp"
#include "slowfast_lv/ode.hpp"
#include "slowfast_lv/particle_sim.hpp"
#include "slowfast_lv/stationary_density.hpp"

namespace slowfast {

namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kCommands = {"geometry", "particle",   "sde",
                                            "boundaries", "stationary", "verify"};
const std::vector<std::string> kChecks = {"prop21", "prop22",   "thm31",
                                          "prop27", "feller", "stationarity-exact"};
const std::vector<std::string> kFlagKeys = {"compare", "deterministic"};

std::string num(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json num_json(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return num(v);
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_csv_header(std::ostream& os, const ExperimentConfig& cfg) {
  os << "# slowfast_lv " << cfg.command << '\n';
  for (const auto& [k, v] : cfg.entries()) {
    os << "# " << k << '=' << v << '\n';
  }
  if (!cfg.deterministic) {
    os << "# generated_at=" << timestamp() << '\n';
  }
}

json config_json(const ExperimentConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) {
    j[k] = v;
  }
  return j;
}

void finish_json(std::ostream& os, json body, const ExperimentConfig& cfg) {
  body["config"] = config_json(cfg);
  if (!cfg.deterministic) {
    body["generated_at"] = timestamp();
  }
  os << body.dump(2) << '\n';
}

std::vector<double> default_times(const ExperimentConfig& cfg, int points) {
  if (!cfg.obs_times.empty()) {
    return cfg.obs_times;
  }
  std::vector<double> t(static_cast<std::size_t>(points) + 1);
  for (int k = 0; k <= points; ++k) {
    t[k] = cfg.t_final * k / points;
  }
  return t;
}

unsigned thread_count(const ExperimentConfig& cfg) {
  return static_cast<unsigned>(cfg.threads);
}

void cmd_geometry(const ExperimentConfig& cfg, std::ostream& os) {
  const auto k_max = cfg.z_grid;
  std::vector<LoopGeometry> rows;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    rows.push_back(loop_geometry(kZMax * static_cast<double>(k) /
                                 static_cast<double>(k_max + 1)));
  }
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& g : rows) {
      arr.push_back({{"z", g.z}, {"theta", g.theta}, {"x_min", g.x_min},
                     {"x_max", g.x_max}, {"x_add", g.x_add}, {"period", g.period},
                     {"action", g.action}, {"m", g.m}});
    }
    finish_json(os, {{"rows", arr}}, cfg);
    return;
  }
  write_csv_header(os, cfg);
  os << "z,theta,x_min,x_max,x_add,period,action,m\n";
  for (const auto& g : rows) {
    os << num(g.z) << ',' << num(g.theta) << ',' << num(g.x_min) << ','
       << num(g.x_max) << ',' << num(g.x_add) << ',' << num(g.period) << ','
       << num(g.action) << ',' << num(g.m) << '\n';
  }
}

CountState particle_start(const ExperimentConfig& cfg) {
  if (cfg.init == "counts") {
    return CountState(cfg.counts[0], cfg.counts[1], cfg.counts[2]);
  }
  return nearest_grid_state(SimplexPoint::centre(), cfg.n);
}

void cmd_particle(const ExperimentConfig& cfg, std::ostream& os) {
  const CountState start = particle_start(cfg);
  const auto times = default_times(cfg, 100);
  const auto runs = static_cast<std::size_t>(cfg.runs);
  const auto traj = particle_ensemble(start, ModelParams(cfg.a, cfg.n), cfg.t_final,
                                      runs, cfg.seed, times, thread_count(cfg));
  if (cfg.format == "json") {
    json arr = json::array();
    for (std::size_t r = 0; r < runs; ++r) {
      json obs = json::array();
      for (const auto& o : traj[r].observations) {
        obs.push_back({{"t", o.t}, {"n1", o.state[0]}, {"n2", o.state[1]},
                       {"n3", o.state[2]}, {"z", z_of(to_point(o.state))}});
      }
      arr.push_back({{"run", r}, {"seed", traj[r].seed}, {"events", traj[r].event_count},
                     {"absorbed", traj[r].absorbed},
                     {"absorption_time", num_json(traj[r].absorption_time)},
                     {"observations", obs}});
    }
    finish_json(os, {{"runs", arr}}, cfg);
    return;
  }
  write_csv_header(os, cfg);
  os << "run,seed,t,n1,n2,n3,z\n";
  for (std::size_t r = 0; r < runs; ++r) {
    for (const auto& o : traj[r].observations) {
      os << r << ',' << traj[r].seed << ',' << num(o.t) << ',' << o.state[0] << ','
         << o.state[1] << ',' << o.state[2] << ',' << num(z_of(to_point(o.state))) << '\n';
    }
  }
}

void cmd_sde(const ExperimentConfig& cfg, std::ostream& os) {
  SdeEnsembleOptions opt;
  opt.obs_times = default_times(cfg, 10);
  opt.threads = thread_count(cfg);
  const auto paths = static_cast<std::size_t>(cfg.paths);
  const SdeEnsemble e = sde_ensemble(cfg.z0, cfg.a, cfg.t_final, cfg.dt, paths,
                                     cfg.seed, opt);
  auto absorbed_at = [&](std::size_t p, std::size_t k) {
    return e.policy == BoundaryPolicy::Absorb && e.values[p][k] == 0.0;
  };
  if (cfg.format == "json") {
    json arr = json::array();
    for (std::size_t p = 0; p < paths; ++p) {
      json zs = json::array();
      for (double z : e.values[p]) zs.push_back(z);
      arr.push_back({{"path", p}, {"z", zs}, {"absorbed", e.absorbed[p]},
                     {"hit_time_lower", num_json(e.hit_time_lower[p])},
                     {"hit_time_upper", num_json(e.hit_time_upper[p])}});
    }
    finish_json(os, {{"policy", to_string(e.policy)}, {"obs_times", e.obs_times},
                     {"paths", arr}},
                cfg);
    return;
  }
  write_csv_header(os, cfg);
  os << "path,t,z,absorbed_flag,hit_time_lower,hit_time_upper\n";
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = 0; k < e.obs_times.size(); ++k) {
      os << p << ',' << num(e.obs_times[k]) << ',' << num(e.values[p][k]) << ','
         << (absorbed_at(p, k) ? 1 : 0) << ',' << num(e.hit_time_lower[p]) << ','
         << num(e.hit_time_upper[p]) << '\n';
    }
  }
}

const std::vector<double>& feller_eps() {
  static const std::vector<double> eps = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9,
                                          1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15};
  return eps;
}

constexpr double kFellerR = 1.0 / 54.0;

json ladder_json(const std::vector<FellerIntegrals>& ladder) {
  json eps = json::array(), sdp = json::array(), pds = json::array();
  for (const auto& f : ladder) {
    eps.push_back(f.eps);
    sdp.push_back(f.s_dp);
    pds.push_back(f.p_ds);
  }
  return {{"eps", eps}, {"int_s_dp", sdp}, {"int_p_ds", pds}};
}

// Finite when the increments between successive decades shrink
// geometrically at the end of the ladder.
bool ladder_converges(const std::vector<FellerIntegrals>& ladder, bool s_dp) {
  auto val = [&](std::size_t i) { return s_dp ? ladder[i].s_dp : ladder[i].p_ds; };
  const std::size_t n = ladder.size();
  const double d_last = std::abs(val(n - 1) - val(n - 2));
  const double d_prev = std::abs(val(n - 2) - val(n - 3));
  return d_last <= 0.9 * d_prev;
}

void cmd_boundaries(const ExperimentConfig& cfg, std::ostream& os) {
  const auto c = classify_boundaries(cfg.a);
  const auto lower = feller_ladder(cfg.a, kFellerR, feller_eps(), BoundarySide::Lower);
  const auto upper = feller_ladder(cfg.a, kFellerR, feller_eps(), BoundarySide::Upper);
  json body = {{"a", cfg.a},
               {"r", kFellerR},
               {"at_zero", to_string(c.at_zero)},
               {"at_max", to_string(c.at_max)},
               {"policy", to_string(policy_for(cfg.a))},
               {"lower", ladder_json(lower)},
               {"upper", ladder_json(upper)}};
  finish_json(os, body, cfg);
}

void cmd_stationary(const ExperimentConfig& cfg, std::ostream& os) {
  if (!(cfg.a > 0.0)) {
    throw ConfigError("stationary: 'a' must be > 0");
  }
  if (cfg.compare) {
    const auto c = stationary_comparison(cfg.a, cfg.n, static_cast<std::size_t>(cfg.paths),
                                         cfg.burn_in, cfg.horizon, cfg.dt, cfg.seed,
                                         static_cast<std::size_t>(cfg.bins),
                                         thread_count(cfg));
    finish_json(os,
                {{"a", c.a}, {"n", c.n}, {"bins", c.bins}, {"sde_paths", c.sde_paths},
                 {"tv_grid_density", c.tv_grid_density},
                 {"tv_sde_density", c.tv_sde_density}, {"tv_grid_sde", c.tv_grid_sde},
                 {"ks_grid_density", c.ks_grid_density}},
                cfg);
    return;
  }
  const StationaryDensity d(cfg.a);
  std::vector<double> zs;
  for (std::int64_t k = 1; k <= cfg.z_grid; ++k) {
    zs.push_back(kZMax * static_cast<double>(k) / static_cast<double>(cfg.z_grid + 1));
  }
  if (cfg.format == "json") {
    json arr = json::array();
    for (double z : zs) arr.push_back({{"z", z}, {"pdf", d.pdf(z)}, {"cdf", d.cdf(z)}});
    finish_json(os, {{"normalization", d.normalization()}, {"rows", arr}}, cfg);
    return;
  }
  write_csv_header(os, cfg);
  os << "z,pdf,cdf\n";
  for (double z : zs) {
    os << num(z) << ',' << num(d.pdf(z)) << ',' << num(d.cdf(z)) << '\n';
  }
}

}  // namespace

ExperimentConfig resolve_verify_defaults(const ExperimentConfig& in) {
  ExperimentConfig cfg = in;
  auto fallback = [&](const std::string& key, const std::string& value) {
    if (!cfg.is_explicit(key)) {
      set_config_value(cfg, key, value);
      cfg.explicit_keys.erase(key);
    }
  };
  if (cfg.check == "stationarity-exact") {
    fallback("n", "5");
    fallback("a", "0.7");
  } else if (cfg.check == "prop21") {
    fallback("n", "20");
    fallback("a", "2");
  } else if (cfg.check == "prop22") {
    fallback("n", "2000");
    fallback("a", "1");
    fallback("runs", "100");
    fallback("t-final", "5");
  } else if (cfg.check == "thm31") {
    fallback("n", "1000");
    fallback("a", "2");
    fallback("runs", "500");
    fallback("paths", "5000");
    fallback("t-final", "0.4");
    fallback("obs-times", "0.1,0.2,0.4");
  } else if (cfg.check == "prop27") {
    fallback("a", "2");
  }
  return cfg;
}

VerifyReport run_verify(const ExperimentConfig& in) {
  const ExperimentConfig cfg = resolve_verify_defaults(in);
  VerifyReport rep;
  rep.check = cfg.check;
  const unsigned threads = thread_count(cfg);
  if (cfg.check == "stationarity-exact") {
    if (cfg.n > kMaxGeneratorN) {
      throw ConfigError("stationarity-exact: 'n' must be <= " + std::to_string(kMaxGeneratorN));
    }
    if (!(cfg.a > 0.0)) {
      throw ConfigError("stationarity-exact: 'a' must be > 0");
    }
    const ModelParams p(cfg.a, cfg.n);
    rep.statistic = stationarity_residual(invariant_measure(cfg.n, p), generator_matrix(cfg.n, p));
    rep.threshold = 1e-10;
    rep.params = {{"n", cfg.n}, {"a", cfg.a}};
  } else if (cfg.check == "prop21") {
    if (!(cfg.a > 0.0)) {
      throw ConfigError("prop21: 'a' must be > 0");
    }
    const double g0 = check_prop21(cfg.n, cfg.a, {{1, 1, 1}}).front().gap;
    const double g1 = check_prop21(3 * cfg.n, cfg.a, {{1, 1, 1}}).front().gap;
    const double g2 = check_prop21(9 * cfg.n, cfg.a, {{1, 1, 1}}).front().gap;
    rep.statistic = (g1 < g0 && g2 < g1) ? g2 / g0 : std::numeric_limits<double>::infinity();
    rep.threshold = 0.15;
    rep.params = {{"n", cfg.n}, {"a", cfg.a}, {"gap_n", g0}, {"gap_3n", g1}, {"gap_9n", g2}};
  } else if (cfg.check == "prop22") {
    std::vector<double> grid(51);
    for (int k = 0; k <= 50; ++k) grid[k] = cfg.t_final * k / 50.0;
    const auto r = check_prop22(cfg.n, cfg.a, SimplexPoint(0.4, 0.3, 0.3), grid,
                                static_cast<std::size_t>(cfg.runs), cfg.seed, threads);
    rep.statistic = r.max_gap();
    rep.threshold = 0.05;
    rep.params = {{"n", cfg.n}, {"a", cfg.a}, {"runs", cfg.runs}, {"t_fast", cfg.t_final}};
  } else if (cfg.check == "thm31") {
    const auto r = check_theorem31(cfg.n, cfg.a, cfg.z0, cfg.obs_times,
                                   static_cast<std::size_t>(cfg.runs),
                                   static_cast<std::size_t>(cfg.paths), cfg.seed, cfg.dt,
                                   threads);
    rep.statistic = *std::max_element(r.ks.begin(), r.ks.end());
    rep.threshold = 0.1;
    rep.params = {{"n", cfg.n}, {"a", cfg.a}, {"z0", cfg.z0}, {"z_initial", r.z_initial},
                  {"runs", cfg.runs}, {"paths", cfg.paths}, {"dt", cfg.dt}};
    for (std::size_t k = 0; k < r.t_obs.size(); ++k) {
      rep.params.emplace_back("ks_t" + num(r.t_obs[k]), r.ks[k]);
    }
  } else if (cfg.check == "prop27") {
    if (!(cfg.a > 0.0)) {
      throw ConfigError("prop27: 'a' must be > 0");
    }
    const std::vector<std::vector<double>> polys = {
        {0, 1}, {0, 0, 1}, {0, 0, 0, 1}, {0, 1, -20}, {1, -3, 50, 400}};
    double worst = 0.0;
    for (const auto& c : polys) {
      worst = std::max(worst, std::abs(stationarity_integral(cfg.a, polynomial(c))));
    }
    rep.statistic = worst;
    rep.threshold = 1e-6;
    rep.params = {{"a", cfg.a}, {"polynomials", 5.0}};
  } else if (cfg.check == "feller") {
    const auto expected = classify_boundaries(cfg.a);
    const auto lower = feller_ladder(cfg.a, kFellerR, feller_eps(), BoundarySide::Lower);
    const auto upper = feller_ladder(cfg.a, kFellerR, feller_eps(), BoundarySide::Upper);
    // Finite integrals expected from the classification.
    const bool lower_sdp = expected.at_zero != BoundaryType::Entrance;
    const bool lower_pds = expected.at_zero != BoundaryType::Exit;
    int mismatches = 0;
    mismatches += ladder_converges(lower, true) != lower_sdp;
    mismatches += ladder_converges(lower, false) != lower_pds;
    mismatches += ladder_converges(upper, true) != false;
    mismatches += ladder_converges(upper, false) != true;
    rep.statistic = mismatches;
    rep.threshold = 0.0;
    rep.params = {{"a", cfg.a}, {"r", kFellerR}, {"eps_min", feller_eps().back()}};
  } else {
    throw ConfigError("unknown check '" + cfg.check + "'");
  }
  rep.pass = rep.statistic <= rep.threshold;
  return rep;
}

int run(const ExperimentConfig& input, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig cfg =
        input.command == "verify" ? resolve_verify_defaults(input) : input;
    validate(cfg);
    std::ofstream file;
    std::ostream* os = &out;
    if (!cfg.out.empty()) {
      file.open(cfg.out, std::ios::binary);
      if (!file) {
        throw IoError("cannot open output file '" + cfg.out + "'");
      }
      os = &file;
    }
    int status = kExitOk;
    if (cfg.command == "geometry") {
      cmd_geometry(cfg, *os);
    } else if (cfg.command == "particle") {
      cmd_particle(cfg, *os);
    } else if (cfg.command == "sde") {
      cmd_sde(cfg, *os);
    } else if (cfg.command == "boundaries") {
      cmd_boundaries(cfg, *os);
    } else if (cfg.command == "stationary") {
      cmd_stationary(cfg, *os);
    } else if (cfg.command == "verify") {
      const VerifyReport rep = run_verify(cfg);
      json params = json::object();
      for (const auto& [k, v] : rep.params) params[k] = num_json(v);
      finish_json(*os,
                  {{"check", rep.check}, {"params", params},
                   {"statistic", num_json(rep.statistic)}, {"threshold", rep.threshold},
                   {"pass", rep.pass}},
                  cfg);
      status = rep.pass ? kExitOk : kExitCheckFailed;
    } else {
      throw ConfigError("unknown command '" + cfg.command + "'");
    }
    os->flush();
    if (!*os) {
      throw IoError("write failed");
    }
    return status;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cyclic Lotka-Volterra particle system, fast flow and averaged diffusion"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Raw {
    std::string value;
    CLI::Option* opt = nullptr;
  };
  std::map<std::string, std::map<std::string, Raw>> raw;
  std::map<std::string, std::string> config_path;
  std::string check;
  const ExperimentConfig defaults;

  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, "");
    if (name == "verify") {
      sub->add_option("check", check, "prop21 | prop22 | thm31 | prop27 | feller | stationarity-exact")
          ->required()
          ->check(CLI::IsMember(kChecks));
    }
    sub->add_option("--config", config_path[name], "key = value file; flags override it");
    for (const auto& key : config_keys()) {
      auto& slot = raw[name][key.key];
      const bool is_flag =
          std::find(kFlagKeys.begin(), kFlagKeys.end(), key.key) != kFlagKeys.end();
      if (is_flag) {
        slot.opt = sub->add_flag("--" + key.key, key.help);
      } else {
        slot.opt = sub->add_option("--" + key.key, slot.value, key.help)
                       ->default_str(get_config_value(defaults, key.key));
      }
    }
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  ExperimentConfig cfg;
  try {
    if (!config_path[command].empty()) {
      cfg = config_from_file(config_path[command]);
    }
    for (auto& [key, slot] : raw[command]) {
      if (slot.opt->count() == 0) {
        continue;
      }
      const bool is_flag =
          std::find(kFlagKeys.begin(), kFlagKeys.end(), key) != kFlagKeys.end();
      set_config_value(cfg, key, is_flag ? "true" : slot.value);
    }
    if (const char* env = std::getenv("SLOWFAST_LV_THREADS"); env && *env) {
      set_config_value(cfg, "threads", env);
    }
    if (cfg.init == "counts" && cfg.counts.size() == 3) {
      const std::int64_t total = cfg.counts[0] + cfg.counts[1] + cfg.counts[2];
      if (!cfg.is_explicit("n")) {
        cfg.n = total;
      } else if (cfg.n != total) {
        throw ConfigError("'counts' must sum to 'n'");
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  cfg.command = command;
  cfg.check = check;
  return run(cfg, out, err);
}

}  // namespace slowfast
