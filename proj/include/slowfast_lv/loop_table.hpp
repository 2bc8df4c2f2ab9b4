#pragma once

#include <cstddef>
#include <vector>

namespace slowfast {

/// m(z) tabulated for fast repeated evaluation, with 4-point Lagrange
/// interpolation in two regimes:
///
///  - z >= split: m itself on a grid uniform in theta(27 z), which packs
///    nodes quadratically toward the centre level 1/27;
///  - z < split: q = 1/m + 6 ln z on a grid uniform in ln z. q is smooth in
///    ln z and vanishes as z -> 0, so m = 1/(q - 6 ln z) keeps the
///    logarithmic singularity exact. Below the last node q is taken as 0.
class LoopTable {
 public:
  explicit LoopTable(std::size_t nodes_per_regime = 1024,
                     double split = 1e-3, double z_floor = 1e-14);

  /// Table with the default resolution, built once on first use.
  static const LoopTable& shared();

  double m(double z) const;

  double split() const { return split_; }

 private:
  double split_;
  double z_floor_;
  double theta_split_;
  double log_floor_;
  double log_step_;
  std::vector<double> m_upper_;
  std::vector<double> q_lower_;
};

}  // namespace slowfast
