#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "slowfast_lv/core.hpp"
#include "slowfast_lv/particle_sim.hpp"
#include "slowfast_lv/stationary_density.hpp"

namespace slowfast {

/// Sorted sample with its empirical CDF.
class EmpiricalLaw {
 public:
  explicit EmpiricalLaw(std::vector<double> samples);

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }
  /// Fraction of samples <= x.
  double cdf(double x) const;

 private:
  std::vector<double> sorted_;
};

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(const EmpiricalLaw& p, const EmpiricalLaw& q);

/// One-sample statistic against a continuous CDF.
double ks_distance(const EmpiricalLaw& p, const std::function<double(double)>& cdf);

/// E[x1^k1 x2^k2 x3^k3] under Dirichlet(a, a, a).
double dirichlet_moment(double a, const std::array<int, 3>& powers);

/// The same moment of x = counts / n under a grid measure.
double grid_moment(const GridMeasure& mu, const std::array<int, 3>& powers);

struct Prop21Row {
  std::int64_t n = 0;
  double a = 0.0;
  std::array<int, 3> powers{};
  double grid = 0.0;
  double dirichlet = 0.0;
  double gap = 0.0;  ///< |grid - dirichlet|
};

std::vector<Prop21Row> check_prop21(std::int64_t n, double a,
                                    const std::vector<std::array<int, 3>>& powers);

struct Prop22Result {
  std::int64_t n = 0;
  double a = 0.0;
  CountState initial;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  /// Fast-scale times; the particle system is observed at t / n.
  std::vector<double> t_grid;
  /// Mean over runs of |dx1| + |dx2| against the fast flow from X_N(0).
  std::vector<double> mean_gap;

  double max_gap() const;
};

Prop22Result check_prop22(std::int64_t n, double a, const SimplexPoint& x0,
                          const std::vector<double>& t_grid, std::size_t runs,
                          std::uint64_t seed, unsigned threads = 0);

/// Grid state nearest to (x_max, (1 - x_max)/2, (1 - x_max)/2) on the z0 loop.
CountState loop_initial_state(double z0, std::int64_t n);

struct Thm31Result {
  std::int64_t n = 0;
  double a = 0.0;
  double z0 = 0.0;
  CountState initial;
  double z_initial = 0.0;  ///< z of the particle start, also the SDE start
  std::size_t runs = 0;
  std::size_t paths = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> t_obs;
  std::vector<double> ks;
  std::vector<double> particle_absorbed;  ///< fraction with z = 0 at t
  std::vector<double> sde_absorbed;
};

Thm31Result check_theorem31(std::int64_t n, double a, double z0,
                            const std::vector<double>& t_obs, std::size_t runs,
                            std::size_t paths, std::uint64_t seed,
                            double dt = 1e-4, unsigned threads = 0);

/// bins + 1 edges with equal mass under the density; first 0, last 1/27.
std::vector<double> equal_mass_edges(const StationaryDensity& density, std::size_t bins);

/// Weighted histogram probabilities; empty weights mean unit weights.
std::vector<double> bin_probabilities(const std::vector<double>& values,
                                      const std::vector<double>& weights,
                                      const std::vector<double>& edges);

/// Half the l1 distance between two probability vectors.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

struct StationaryComparison {
  double a = 0.0;
  std::int64_t n = 0;
  std::size_t bins = 0;
  std::size_t sde_paths = 0;
  double burn_in = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double tv_grid_density = 0.0;
  double tv_sde_density = 0.0;
  double tv_grid_sde = 0.0;
  double ks_grid_density = 0.0;
};

/// Exact grid z-law vs long-run SDE occupation vs the quadrature density,
/// on equal-mass bins. sde_paths = 0 skips the SDE leg.
StationaryComparison stationary_comparison(double a, std::int64_t n,
                                           std::size_t sde_paths, double burn_in,
                                           double horizon, double dt,
                                           std::uint64_t seed, std::size_t bins = 30,
                                           unsigned threads = 0);

/// Fraction of runs from the centre-nearest state whose smallest
/// coordinate drops below `threshold` at some t <= t_final.
double boundary_visit_fraction(std::int64_t n, double a, double t_final,
                               double threshold, std::size_t runs,
                               std::uint64_t seed, unsigned threads = 0);

/// Time-indexed samples with the metadata needed to regenerate them.
struct EnsembleRecord {
  std::map<std::string, std::string> metadata;
  std::vector<double> obs_times;
  /// values[run][k] at obs_times[k].
  std::vector<std::vector<double>> values;
};

}  // namespace slowfast
