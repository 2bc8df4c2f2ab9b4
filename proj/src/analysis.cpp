#include "slowfast_lv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slowfast_lv/averaged_sde.hpp"
#include "slowfast_lv/fast_dynamics.hpp"
#include "slowfast_lv/parallel.hpp"

namespace slowfast {

EmpiricalLaw::EmpiricalLaw(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) {
    throw std::invalid_argument("EmpiricalLaw: empty sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalLaw::cdf(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(const EmpiricalLaw& p, const EmpiricalLaw& q) {
  const auto& x = p.sorted();
  const auto& y = q.sorted();
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_distance(const EmpiricalLaw& p, const std::function<double(double)>& cdf) {
  const auto& x = p.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double dirichlet_moment(double a, const std::array<int, 3>& powers) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("dirichlet_moment: a must be > 0");
  }
  double log_m = std::lgamma(3.0 * a);
  int total = 0;
  for (int k : powers) {
    if (k < 0) {
      throw std::invalid_argument("dirichlet_moment: powers must be >= 0");
    }
    log_m += std::lgamma(a + k) - std::lgamma(a);
    total += k;
  }
  return std::exp(log_m - std::lgamma(3.0 * a + total));
}

double grid_moment(const GridMeasure& mu, const std::array<int, 3>& powers) {
  const double n = static_cast<double>(mu.n);
  double sum = 0.0;
  for (std::size_t j = 0; j < mu.states.size(); ++j) {
    double term = mu.weights[static_cast<Eigen::Index>(j)];
    for (int i = 0; i < 3; ++i) {
      term *= std::pow(static_cast<double>(mu.states[j][i]) / n, powers[i]);
    }
    sum += term;
  }
  return sum;
}

std::vector<Prop21Row> check_prop21(std::int64_t n, double a,
                                    const std::vector<std::array<int, 3>>& powers) {
  const GridMeasure mu = invariant_measure(n, ModelParams(a, n));
  std::vector<Prop21Row> rows;
  for (const auto& k : powers) {
    Prop21Row row;
    row.n = n;
    row.a = a;
    row.powers = k;
    row.grid = grid_moment(mu, k);
    row.dirichlet = dirichlet_moment(a, k);
    row.gap = std::abs(row.grid - row.dirichlet);
    rows.push_back(row);
  }
  return rows;
}

double Prop22Result::max_gap() const {
  return mean_gap.empty() ? 0.0 : *std::max_element(mean_gap.begin(), mean_gap.end());
}

Prop22Result check_prop22(std::int64_t n, double a, const SimplexPoint& x0,
                          const std::vector<double>& t_grid, std::size_t runs,
                          std::uint64_t seed, unsigned threads) {
  if (n < 1 || runs == 0) {
    throw std::invalid_argument("check_prop22: need n >= 1 and runs >= 1");
  }
  Prop22Result res;
  res.n = n;
  res.a = a;
  res.initial = nearest_grid_state(x0, n);
  res.runs = runs;
  res.seed = seed;
  res.t_grid = t_grid;
  const std::vector<SimplexPoint> flow = flow_at_times(to_point(res.initial), t_grid);
  std::vector<double> obs(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    obs[k] = t_grid[k] / static_cast<double>(n);
  }
  const double t_final = obs.empty() ? 0.0 : obs.back();
  const auto traj =
      particle_ensemble(res.initial, ModelParams(a, n), t_final, runs, seed, obs, threads);
  res.mean_gap.assign(t_grid.size(), 0.0);
  for (const auto& tr : traj) {
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      const SimplexPoint x = to_point(tr.observations[k].state);
      res.mean_gap[k] += std::abs(x[0] - flow[k][0]) + std::abs(x[1] - flow[k][1]);
    }
  }
  for (double& g : res.mean_gap) {
    g /= static_cast<double>(runs);
  }
  return res;
}

CountState loop_initial_state(double z0, std::int64_t n) {
  const LoopRoots r = loop_roots(z0);
  const double x23 = 0.5 * (1.0 - r.x_max);
  return nearest_grid_state(SimplexPoint(r.x_max, x23, x23), n);
}

Thm31Result check_theorem31(std::int64_t n, double a, double z0,
                            const std::vector<double>& t_obs, std::size_t runs,
                            std::size_t paths, std::uint64_t seed, double dt,
                            unsigned threads) {
  if (t_obs.empty() || runs == 0 || paths == 0) {
    throw std::invalid_argument("check_theorem31: need observation times, runs and paths");
  }
  Thm31Result res;
  res.n = n;
  res.a = a;
  res.z0 = z0;
  res.initial = loop_initial_state(z0, n);
  res.z_initial = z_of(to_point(res.initial));
  res.runs = runs;
  res.paths = paths;
  res.dt = dt;
  res.seed = seed;
  res.t_obs = t_obs;

  const auto traj = particle_ensemble(res.initial, ModelParams(a, n), t_obs.back(), runs,
                                      derive_stream_seed(seed, 0), t_obs, threads);
  SdeEnsembleOptions opt;
  opt.obs_times = t_obs;
  opt.threads = threads;
  const SdeEnsemble sde = sde_ensemble(res.z_initial, a, t_obs.back(), dt, paths,
                                       derive_stream_seed(seed, 1), opt);
  for (std::size_t k = 0; k < t_obs.size(); ++k) {
    std::vector<double> zp(runs), zs(paths);
    double p_abs = 0.0, s_abs = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      zp[r] = z_of(to_point(traj[r].observations[k].state));
      p_abs += zp[r] == 0.0 ? 1.0 : 0.0;
    }
    for (std::size_t p = 0; p < paths; ++p) {
      zs[p] = sde.values[p][k];
      s_abs += zs[p] == 0.0 ? 1.0 : 0.0;
    }
    res.ks.push_back(ks_distance(EmpiricalLaw(std::move(zp)), EmpiricalLaw(std::move(zs))));
    res.particle_absorbed.push_back(p_abs / static_cast<double>(runs));
    res.sde_absorbed.push_back(s_abs / static_cast<double>(paths));
  }
  return res;
}

std::vector<double> equal_mass_edges(const StationaryDensity& density, std::size_t bins) {
  if (bins == 0) {
    throw std::invalid_argument("equal_mass_edges: bins must be >= 1");
  }
  std::vector<double> edges(bins + 1);
  edges.front() = 0.0;
  edges.back() = kZMax;
  for (std::size_t k = 1; k < bins; ++k) {
    edges[k] = density.quantile(static_cast<double>(k) / static_cast<double>(bins));
  }
  return edges;
}

std::vector<double> bin_probabilities(const std::vector<double>& values,
                                      const std::vector<double>& weights,
                                      const std::vector<double>& edges) {
  if (edges.size() < 2) {
    throw std::invalid_argument("bin_probabilities: need at least two edges");
  }
  if (!weights.empty() && weights.size() != values.size()) {
    throw std::invalid_argument("bin_probabilities: weight count mismatch");
  }
  std::vector<double> p(edges.size() - 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    // Interior edges split bins; values beyond the outer edges go to the
    // end bins.
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, values[i]);
    p[static_cast<std::size_t>(it - (edges.begin() + 1))] += w;
    total += w;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("bin_probabilities: zero total weight");
  }
  for (double& x : p) {
    x /= total;
  }
  return p;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("tv_distance: size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += std::abs(p[i] - q[i]);
  }
  return 0.5 * s;
}

StationaryComparison stationary_comparison(double a, std::int64_t n,
                                           std::size_t sde_paths, double burn_in,
                                           double horizon, double dt,
                                           std::uint64_t seed, std::size_t bins,
                                           unsigned threads) {
  StationaryComparison c;
  c.a = a;
  c.n = n;
  c.bins = bins;
  c.sde_paths = sde_paths;
  c.burn_in = burn_in;
  c.horizon = horizon;
  c.dt = dt;
  c.seed = seed;

  const StationaryDensity density(a);
  const auto edges = equal_mass_edges(density, bins);
  const std::vector<double> reference(bins, 1.0 / static_cast<double>(bins));

  const GridMeasure mu = invariant_measure(n, ModelParams(a, n));
  std::vector<double> z_grid(mu.states.size()), w_grid(mu.states.size());
  for (std::size_t j = 0; j < mu.states.size(); ++j) {
    z_grid[j] = z_of(to_point(mu.states[j]));
    w_grid[j] = mu.weights[static_cast<Eigen::Index>(j)];
  }
  const auto p_grid = bin_probabilities(z_grid, w_grid, edges);
  c.tv_grid_density = tv_distance(p_grid, reference);

  // Weighted KS of the atomic grid law against the density CDF.
  std::vector<std::size_t> order(z_grid.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return z_grid[l] < z_grid[r]; });
  double below = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double v = z_grid[order[k]];
    double mass = 0.0;
    while (k < order.size() && z_grid[order[k]] == v) mass += w_grid[order[k++]];
    const double f = density.cdf(v);
    c.ks_grid_density = std::max({c.ks_grid_density, std::abs(f - below),
                                  std::abs(below + mass - f)});
    below += mass;
  }

  if (sde_paths > 0) {
    std::vector<std::vector<double>> occ(sde_paths);
    const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(0.01 / dt)));
    parallel_for(sde_paths, threads, [&](std::size_t i) {
      occ[i] = sde_occupation(1.0 / 54.0, a, burn_in, horizon, dt, stride,
                              derive_stream_seed(seed, i));
    });
    std::vector<double> z_sde;
    for (const auto& o : occ) {
      z_sde.insert(z_sde.end(), o.begin(), o.end());
    }
    const auto p_sde = bin_probabilities(z_sde, {}, edges);
    c.tv_sde_density = tv_distance(p_sde, reference);
    c.tv_grid_sde = tv_distance(p_grid, p_sde);
  }
  return c;
}

double boundary_visit_fraction(std::int64_t n, double a, double t_final,
                               double threshold, std::size_t runs,
                               std::uint64_t seed, unsigned threads) {
  if (runs == 0) {
    throw std::invalid_argument("boundary_visit_fraction: runs must be >= 1");
  }
  const CountState start = nearest_grid_state(SimplexPoint::centre(), n);
  const double limit = threshold * static_cast<double>(n);
  std::vector<char> visited(runs, 0);
  parallel_for(runs, threads, [&](std::size_t r) {
    Rng rng(derive_stream_seed(seed, r));
    bool hit = false;
    simulate_jumps(start, a, t_final, rng,
                   [&](double, int channel, const CountState&, const CountState& after) {
                     // Only the source species of a jump can decrease.
                     hit = static_cast<double>(after[channel]) < limit;
                     return !hit;
                   });
    visited[r] = hit ? 1 : 0;
  });
  double count = 0.0;
  for (char v : visited) count += v;
  return count / static_cast<double>(runs);
}

}  // namespace slowfast
