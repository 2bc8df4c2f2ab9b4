#pragma once

#include <cstddef>
#include <vector>

#include "slowfast_lv/fast_dynamics.hpp"

namespace slowfast {

/// Density proportional to z^(a-1) T(z) on (0, 1/27), a > 0.
///
/// The CDF is tabulated in s = z^a, where it has the bounded derivative
/// T(s^(1/a)) / (a C), and interpolated with cubic Hermite segments.
class StationaryDensity {
 public:
  explicit StationaryDensity(double a, std::size_t table_nodes = 2048);

  double a() const { return a_; }
  /// C = int_0^{1/27} z^(a-1) T(z) dz by quadrature.
  double normalization() const { return norm_; }

  double pdf(double z) const;
  double cdf(double z) const;
  /// Inverse of cdf on [0, 1].
  double quantile(double u) const;

 private:
  double a_;
  double norm_;
  double s_max_;
  double step_;
  std::vector<double> cdf_;
  std::vector<double> slope_;
};

/// int_0^{1/27} z^(a-1) T(z) dz, a > 0.
double stationary_normalization(double a);

/// int z^(a-1) T(z) L_avg f(z) dz divided by the normalization.
double stationarity_integral(double a, const LevelFunction& f);

}  // namespace slowfast
