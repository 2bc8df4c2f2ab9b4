#include "slowfast_lv/particle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slowfast_lv/parallel.hpp"

namespace slowfast {

RateVector rates(const CountState& s, const ModelParams& params) {
  RateVector out;
  for (int i = 0; i < 3; ++i) {
    // Integer product first so that the a = 0 rates are exact integers.
    const std::int64_t pair = s[i] * s[next(i)];
    out.r[i] = static_cast<double>(pair) + params.a * static_cast<double>(s[i]);
  }
  out.total = out.r[0] + out.r[1] + out.r[2];
  return out;
}

JumpTrajectory ssa_run(const CountState& initial, const ModelParams& params,
                       double t_final, std::uint64_t seed,
                       const SsaOptions& options) {
  if (!(t_final >= 0.0)) {
    throw std::invalid_argument("ssa_run: t_final must be >= 0");
  }
  if (!std::is_sorted(options.obs_times.begin(), options.obs_times.end())) {
    throw std::invalid_argument("ssa_run: observation times must be sorted");
  }
  JumpTrajectory traj;
  traj.initial = initial;
  traj.params = params;
  traj.seed = seed;
  traj.t_final = t_final;
  traj.observations.reserve(options.obs_times.size());

  const auto& obs = options.obs_times;
  std::size_t next_obs = 0;
  Rng rng(seed);
  const SsaOutcome outcome = simulate_jumps(
      initial, params.a, t_final, rng,
      [&](double t, int channel, const CountState& before, const CountState&) {
        while (next_obs < obs.size() && obs[next_obs] < t) {
          traj.observations.push_back({obs[next_obs], before});
          ++next_obs;
        }
        if (options.record_events) {
          traj.events.push_back({t, channel});
        }
      });
  for (; next_obs < obs.size(); ++next_obs) {
    traj.observations.push_back({obs[next_obs], outcome.final_state});
  }
  traj.final_state = outcome.final_state;
  traj.event_count = outcome.events;
  traj.absorbed = outcome.absorbed;
  traj.absorption_time = outcome.absorption_time;
  if (outcome.absorbed) {
    for (int i = 0; i < 3; ++i) {
      if (outcome.final_state[i] == outcome.final_state.total()) {
        traj.absorbing_vertex = i;
      }
    }
  }
  return traj;
}

std::vector<JumpTrajectory> particle_ensemble(const CountState& initial,
                                              const ModelParams& params,
                                              double t_final, std::size_t runs,
                                              std::uint64_t seed,
                                              const std::vector<double>& obs_times,
                                              unsigned threads) {
  std::vector<JumpTrajectory> out(runs);
  SsaOptions options;
  options.obs_times = obs_times;
  parallel_for(runs, threads, [&](std::size_t r) {
    out[r] = ssa_run(initial, params, t_final, derive_stream_seed(seed, r), options);
  });
  return out;
}

SimplexGrid::SimplexGrid(std::int64_t n) : n_(n) {
  if (n < 0) {
    throw std::invalid_argument("SimplexGrid: n must be >= 0");
  }
  states_.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
  for (std::int64_t n1 = 0; n1 <= n; ++n1) {
    for (std::int64_t n2 = 0; n2 <= n - n1; ++n2) {
      states_.emplace_back(n1, n2, n - n1 - n2);
    }
  }
}

std::size_t SimplexGrid::index(const CountState& s) const {
  if (s.total() != n_) {
    throw std::invalid_argument("SimplexGrid::index: state total mismatch");
  }
  const std::int64_t n1 = s[0];
  return static_cast<std::size_t>(n1 * (n_ + 1) - n1 * (n1 - 1) / 2 + s[1]);
}

RateMatrix generator_matrix(std::int64_t n, const ModelParams& params) {
  if (n < 1 || n > kMaxGeneratorN) {
    throw std::invalid_argument("generator_matrix: n must be in [1, " +
                                std::to_string(kMaxGeneratorN) + "]");
  }
  const SimplexGrid grid(n);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(grid.size() * 4);
  for (std::size_t row = 0; row < grid.size(); ++row) {
    const CountState& s = grid.states()[row];
    const RateVector rv = rates(s, params);
    for (int i = 0; i < 3; ++i) {
      if (rv.r[i] > 0.0) {
        entries.emplace_back(row, grid.index(apply_jump(s, JumpVector(i))), rv.r[i]);
      }
    }
    entries.emplace_back(row, row, -rv.total);
  }
  RateMatrix q(grid.size(), grid.size());
  q.setFromTriplets(entries.begin(), entries.end());
  return q;
}

GridMeasure invariant_measure(std::int64_t n, const ModelParams& params) {
  if (!(params.a > 0.0)) {
    throw std::invalid_argument(
        "invariant_measure: a must be > 0 (vertices absorb at a = 0)");
  }
  if (n < 1) {
    throw std::invalid_argument("invariant_measure: n must be >= 1");
  }
  const SimplexGrid grid(n);
  GridMeasure gm;
  gm.n = n;
  gm.states = grid.states();
  gm.weights.resize(static_cast<Eigen::Index>(grid.size()));
  // log Gamma(k + a) - log Gamma(k + 1) is shared by every coordinate.
  std::vector<double> log_factor(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    log_factor[k] = std::lgamma(kd + params.a) - std::lgamma(kd + 1.0);
  }
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const CountState& s = grid.states()[j];
    const double lw = log_factor[s[0]] + log_factor[s[1]] + log_factor[s[2]];
    gm.weights[j] = lw;
    max_log = std::max(max_log, lw);
  }
  // Neumaier-compensated normalization.
  double sum = 0.0, carry = 0.0;
  for (Eigen::Index j = 0; j < gm.weights.size(); ++j) {
    const double w = std::exp(gm.weights[j] - max_log);
    gm.weights[j] = w;
    const double t = sum + w;
    carry += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
    sum = t;
  }
  gm.weights /= (sum + carry);
  return gm;
}

double stationarity_residual(const GridMeasure& mu, const RateMatrix& generator) {
  const Eigen::VectorXd flux = generator.transpose() * mu.weights;
  return flux.cwiseAbs().maxCoeff();
}

std::vector<CountState> sample_invariant(const GridMeasure& gm, std::size_t count,
                                         std::uint64_t seed) {
  std::vector<double> cdf(static_cast<std::size_t>(gm.weights.size()));
  double acc = 0.0;
  for (std::size_t j = 0; j < cdf.size(); ++j) {
    acc += gm.weights[static_cast<Eigen::Index>(j)];
    cdf[j] = acc;
  }
  Rng rng(seed);
  std::vector<CountState> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto j = std::min<std::size_t>(
        static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    out.push_back(gm.states[j]);
  }
  return out;
}

double quadratic_operator(const GridFunction& g, const CountState& s,
                          const ModelParams& params) {
  const std::int64_t n = s.total();
  if (n < 1) {
    throw std::invalid_argument("quadratic_operator: empty population");
  }
  const double nd = static_cast<double>(n);
  const Eigen::Vector3d x(s[0] / nd, s[1] / nd, s[2] / nd);
  const double gx = g(x);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (s[i] == 0) {
      continue;
    }
    Eigen::Vector3d shifted = x;
    shifted[i] -= 1.0 / nd;
    shifted[next(i)] += 1.0 / nd;
    const double diff = g(shifted) - gx;
    sum += x[i] * (params.a / nd + x[next(i)]) * nd * nd * diff * diff;
  }
  return sum;
}

double wendel_ratio(std::int64_t n, double x, double a) {
  if (n < 1) {
    throw std::invalid_argument("wendel_ratio: n must be >= 1");
  }
  if (!(x >= 0.0) || !(a >= 0.0)) {
    throw std::invalid_argument("wendel_ratio: need x >= 0 and a >= 0");
  }
  if (x == 0.0 && a < 1.0) {
    throw std::domain_error("wendel_ratio: x = 0 requires a >= 1");
  }
  const double nd = static_cast<double>(n);
  return std::exp((1.0 - a) * std::log(nd) + std::lgamma(nd * x + a) -
                  std::lgamma(nd * x + 1.0));
}

}  // namespace slowfast
