#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "slowfast_lv/core.hpp"
#include "slowfast_lv/rng.hpp"

namespace slowfast {

/// Channel rates r_i = n_i (a + n_{i+1}) of the count-level jump process.
struct RateVector {
  std::array<double, 3> r{0.0, 0.0, 0.0};
  double total = 0.0;
};

RateVector rates(const CountState& s, const ModelParams& params);

struct JumpEvent {
  double t;
  int channel;
};

struct Observation {
  double t;
  CountState state;
};

struct JumpTrajectory {
  CountState initial;
  ModelParams params;
  std::uint64_t seed = 0;
  double t_final = 0.0;
  /// Full event log; filled only when requested.
  std::vector<JumpEvent> events;
  /// State at each requested observation time.
  std::vector<Observation> observations;
  CountState final_state;
  std::uint64_t event_count = 0;
  /// All rates vanished (only possible for a = 0, at a vertex).
  bool absorbed = false;
  double absorption_time = std::numeric_limits<double>::infinity();
  int absorbing_vertex = -1;
};

struct SsaOptions {
  /// Nondecreasing times in [0, t_final].
  std::vector<double> obs_times;
  bool record_events = false;
};

struct SsaOutcome {
  CountState final_state;
  std::uint64_t events = 0;
  bool absorbed = false;
  double absorption_time = std::numeric_limits<double>::infinity();
};

/// Direct-method SSA from time 0 to t_final. on_event(t, channel, before,
/// after) is invoked for every jump, in time order; if it returns bool,
/// false stops the run early.
template <typename OnEvent>
SsaOutcome simulate_jumps(CountState s, double a, double t_final, Rng& rng,
                          OnEvent&& on_event) {
  SsaOutcome out;
  double t = 0.0;
  while (true) {
    const double n0 = static_cast<double>(s[0]);
    const double n1 = static_cast<double>(s[1]);
    const double n2 = static_cast<double>(s[2]);
    const double r0 = n0 * (a + n1);
    const double r1 = n1 * (a + n2);
    const double total = r0 + r1 + n2 * (a + n0);
    if (total <= 0.0) {
      out.absorbed = true;
      out.absorption_time = t;
      break;
    }
    t += rng.exponential(total);
    if (t > t_final) {
      break;
    }
    const double pick = rng.uniform() * total;
    int channel = pick < r0 ? 0 : (pick < r0 + r1 ? 1 : 2);
    while (s[channel] == 0) {
      channel = (channel + 2) % 3;  // round-off landed on an empty channel
    }
    const CountState before = s;
    --s.counts[channel];
    ++s.counts[next(channel)];
    ++out.events;
    if constexpr (std::is_same_v<std::invoke_result_t<OnEvent&, double, int,
                                                      const CountState&,
                                                      const CountState&>,
                                 bool>) {
      if (!on_event(t, channel, before, s)) {
        break;
      }
    } else {
      on_event(t, channel, before, s);
    }
  }
  out.final_state = s;
  return out;
}

JumpTrajectory ssa_run(const CountState& initial, const ModelParams& params,
                       double t_final, std::uint64_t seed,
                       const SsaOptions& options = {});

/// Independent runs; run r uses stream derive_stream_seed(seed, r).
std::vector<JumpTrajectory> particle_ensemble(const CountState& initial,
                                              const ModelParams& params,
                                              double t_final, std::size_t runs,
                                              std::uint64_t seed,
                                              const std::vector<double>& obs_times,
                                              unsigned threads = 0);

/// All states with total n, ordered by (n1, n2) lexicographically.
class SimplexGrid {
 public:
  explicit SimplexGrid(std::int64_t n);

  std::int64_t n() const { return n_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<CountState>& states() const { return states_; }
  std::size_t index(const CountState& s) const;

 private:
  std::int64_t n_;
  std::vector<CountState> states_;
};

using RateMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr std::int64_t kMaxGeneratorN = 60;

/// Generator of the jump process on the grid with total n (n <= 60); rows
/// sum to zero. State order follows SimplexGrid.
RateMatrix generator_matrix(std::int64_t n, const ModelParams& params);

struct GridMeasure {
  std::int64_t n = 0;
  std::vector<CountState> states;
  Eigen::VectorXd weights;
};

/// Product measure prod_i Gamma(n_i + a) / Gamma(n_i + 1), normalized;
/// requires a > 0.
GridMeasure invariant_measure(std::int64_t n, const ModelParams& params);

/// max_j |(mu^T L)_j|.
double stationarity_residual(const GridMeasure& mu, const RateMatrix& generator);

/// i.i.d. draws by inverse CDF over the enumerated states.
std::vector<CountState> sample_invariant(const GridMeasure& gm, std::size_t count,
                                         std::uint64_t seed);

using GridFunction = std::function<double(const Eigen::Vector3d&)>;

/// q_N g(x) = sum_i x_i (a/N + x_{i+1}) N^2 (g(x + u_i/N) - g(x))^2 at
/// x = counts / N.
double quadratic_operator(const GridFunction& g, const CountState& s,
                          const ModelParams& params);

/// N^(1-a) Gamma(N x + a) / Gamma(N x + 1), through log-Gamma.
double wendel_ratio(std::int64_t n, double x, double a);

}  // namespace slowfast
