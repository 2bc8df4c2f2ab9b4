#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "slowfast_lv/core.hpp"
#include "slowfast_lv/fast_dynamics.hpp"
#include "slowfast_lv/loop_table.hpp"

namespace slowfast {

/// b(z) = 3 (a m(z) - z), evaluated through mean_m.
double drift(double z, double a);

/// sigma(z) = sqrt(6 z m(z)), evaluated through mean_m.
double diffusion(double z);

/// Drift and diffusion backed by the shared m-table.
class SdeCoefficients {
 public:
  explicit SdeCoefficients(double a, const LoopTable& table = LoopTable::shared());

  double a() const { return a_; }
  double b(double z) const { return 3.0 * (a_ * table_->m(z) - z); }
  double sigma(double z) const;

 private:
  double a_;
  const LoopTable* table_;
};

enum class BoundaryType { Entrance, Regular, Exit };

std::string to_string(BoundaryType t);

struct BoundaryClassification {
  double a = 0.0;
  BoundaryType at_zero = BoundaryType::Entrance;
  BoundaryType at_max = BoundaryType::Entrance;
};

BoundaryClassification classify_boundaries(double a);

/// Scale and speed functions with p(1/54) = s(1/54) = 0.
class ScaleSpeed {
 public:
  static constexpr double kAnchor = 1.0 / 54.0;

  explicit ScaleSpeed(double a);

  /// dp/dz = -1 / (z^a A(z)).
  double dp(double z) const;
  /// ds/dz = z^(a-1) T(z) / 3.
  double ds(double z) const;
  double p(double z) const;
  double s(double z) const;

 private:
  double a_;
};

enum class BoundarySide { Lower, Upper };

/// Truncated Feller integrals from r toward one boundary, stopped at
/// distance eps from it. P and S are the scale and speed re-anchored at r.
struct FellerIntegrals {
  double a = 0.0;
  double r = 0.0;
  double eps = 0.0;
  BoundarySide side = BoundarySide::Lower;
  double s_dp = 0.0;  ///< int_r S dP
  double p_ds = 0.0;  ///< int_r P dS
};

FellerIntegrals feller_integrals(double a, double r, double eps, BoundarySide side);

/// The same integrals at each eps of a decreasing ladder, from one sweep.
std::vector<FellerIntegrals> feller_ladder(double a, double r,
                                           const std::vector<double>& eps,
                                           BoundarySide side);

enum class BoundaryPolicy { Clamp, Reflect, Absorb };

/// Clamp for a >= 1, reflect for 0 < a < 1, absorb for a = 0.
BoundaryPolicy policy_for(double a);

std::string to_string(BoundaryPolicy p);

inline constexpr double kZFloor = 1e-14;

struct StepResult {
  double z = 0.0;
  bool hit_lower = false;  ///< unprojected z' <= 0
  bool hit_upper = false;  ///< unprojected z' >= 1/27
  bool absorbed = false;
};

/// One Euler-Maruyama step followed by the boundary policy.
StepResult em_step(double z, double dt, double gaussian,
                   const SdeCoefficients& coeffs, BoundaryPolicy policy,
                   double z_floor = kZFloor);

struct SdeEnsembleOptions {
  std::vector<double> obs_times;
  unsigned threads = 0;
  /// Each step draws this many normals and uses their scaled sum, so a run
  /// with (dt, k) shares its Brownian path with a run at (dt / k, 1).
  int brownian_substeps = 1;
  double z_floor = kZFloor;
};

struct SdeEnsemble {
  double z0 = 0.0;
  double a = 0.0;
  double t_final = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  BoundaryPolicy policy = BoundaryPolicy::Clamp;
  std::vector<double> obs_times;
  /// values[path][k] is Z at obs_times[k].
  std::vector<std::vector<double>> values;
  std::vector<bool> absorbed;
  std::vector<double> hit_time_lower;
  std::vector<double> hit_time_upper;
};

/// Independent Euler-Maruyama paths; path i uses derive_stream_seed(seed, i).
/// Observation times are rounded up to the step grid.
SdeEnsemble sde_ensemble(double z0, double a, double t_final, double dt,
                         std::size_t paths, std::uint64_t seed,
                         const SdeEnsembleOptions& options = {});

/// Values of Z sampled every `stride` steps of one path over
/// [burn_in, burn_in + horizon].
std::vector<double> sde_occupation(double z0, double a, double burn_in,
                                   double horizon, double dt, std::size_t stride,
                                   std::uint64_t seed);

/// L_avg g(z) = 3 (a m - z) g'(z) + 3 z m g''(z).
double avg_generator_apply(const LevelFunction& g, double z, double a);

}  // namespace slowfast
