#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace slowfast {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Upper end of the range of the slow variable, attained only at the centre.
inline constexpr double kZMax = 1.0 / 27.0;

/// Barycentric point of the 2-simplex with all three coordinates stored.
///
/// Construction renormalizes sums that are off by at most 1e-9 and clamps
/// coordinates in [-1e-12, 0) to zero; anything further off is rejected
/// with std::domain_error.
class SimplexPoint {
 public:
  SimplexPoint() : SimplexPoint(centre()) {}
  SimplexPoint(double x1, double x2, double x3);
  explicit SimplexPoint(const Eigen::Vector3d& x);

  static SimplexPoint centre();
  static SimplexPoint vertex(int i);

  double operator[](int i) const { return x_[i]; }
  const Eigen::Vector3d& coords() const { return x_; }

 private:
  Eigen::Vector3d x_;
};

/// Occupation numbers (n1, n2, n3) of the three species.
struct CountState {
  std::array<std::int64_t, 3> counts{0, 0, 0};

  CountState() = default;
  CountState(std::int64_t n1, std::int64_t n2, std::int64_t n3);

  std::int64_t operator[](int i) const { return counts[i]; }
  std::int64_t total() const { return counts[0] + counts[1] + counts[2]; }

  friend bool operator==(const CountState&, const CountState&) = default;
};

/// Cyclic jump channel: one particle moves from species `source` to
/// species `source + 1 (mod 3)`.
struct JumpVector {
  int source = 0;

  explicit JumpVector(int i);
  int target() const { return (source + 1) % 3; }
};

struct ModelParams {
  double a = 1.0;
  std::int64_t n = 0;

  ModelParams() = default;
  explicit ModelParams(double a_, std::int64_t n_ = 0);
};

inline constexpr int next(int i) { return (i + 1) % 3; }
inline constexpr int prev(int i) { return (i + 2) % 3; }

/// Product x1 x2 x3 of the barycentric coordinates.
template <typename Derived>
typename Derived::Scalar z_of(const Eigen::MatrixBase<Derived>& x) {
  return x(0) * x(1) * x(2);
}

inline double z_of(const SimplexPoint& p) { return z_of(p.coords()); }

SimplexPoint to_point(const CountState& s);

CountState apply_jump(const CountState& s, JumpVector j);

/// Grid point with total n closest to p in l1; ties resolved so that the
/// counts still sum to n exactly.
CountState nearest_grid_state(const SimplexPoint& p, std::int64_t n);

std::string to_string(const CountState& s);

}  // namespace slowfast
