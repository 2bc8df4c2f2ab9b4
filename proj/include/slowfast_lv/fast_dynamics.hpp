#pragma once

#include <functional>
#include <vector>

#include "slowfast_lv/core.hpp"

namespace slowfast {

/// Lotka-Volterra field, component j equal to x_j (x_{j-1} - x_{j+1}).
template <typename Derived>
Vector3<typename Derived::Scalar> vector_field(
    const Eigen::MatrixBase<Derived>& x) {
  return {x(0) * (x(2) - x(1)), x(1) * (x(0) - x(2)), x(2) * (x(1) - x(0))};
}

inline Eigen::Vector3d vector_field(const SimplexPoint& p) {
  return vector_field(p.coords());
}

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<SimplexPoint> points;
  double z0 = 0.0;
};

/// Adaptive Dormand-Prince integration of the fast flow, local tolerance
/// 1e-10. One sample per accepted step (steps are capped at dt_max), plus
/// the initial point. Throws IntegrationError on step-size underflow.
FlowTrajectory integrate_flow(const SimplexPoint& p0, double t_final,
                              double dt_max);

/// Flow evaluated exactly at the given nondecreasing times (t >= 0).
std::vector<SimplexPoint> flow_at_times(const SimplexPoint& p0,
                                        const std::vector<double>& times);

/// Roots of x (1 - x)^2 = 4 z, ordered x_min < x_max < x_add, together with
/// the angle theta(27 z) and the root differences computed without
/// cancellation.
struct LoopRoots {
  double z = 0.0;
  double theta = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  double x_add = 0.0;
  double spread = 0.0;   ///< x_max - x_min
  double add_gap = 0.0;  ///< x_add - x_max
};

/// Requires z in (0, 1/27); throws std::domain_error otherwise.
LoopRoots loop_roots(double z);

/// Second coordinate on the level set {z(x) = z} at first coordinate x1:
/// the lower root when x1 is increasing along the flow, the upper root
/// otherwise.
double branch_x2(double x1, double z, bool increasing);

/// Loop period T(z) by quadrature, z in (0, 1/27).
double period(double z);

/// Signed area A(z) < 0 enclosed by the loop, z in (0, 1/27).
double action(double z);

/// m(z) = -A(z)/T(z) on [0, 1/27], extended by 0 at both endpoints.
double mean_m(double z);

struct LoopGeometry {
  double z = 0.0;
  double theta = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  double x_add = 0.0;
  double period = 0.0;
  double action = 0.0;
  double m = 0.0;
};

LoopGeometry loop_geometry(double z);

/// The point of the level-z loop where x1 is minimal.
SimplexPoint loop_start_point(double z);

using PointFunction = std::function<double(const Eigen::Vector3d&)>;

/// Time average of f over one period of the loop at level z.
double time_average(const PointFunction& f, double z);

/// A real function of the slow variable together with its first two
/// derivatives.
struct LevelFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

/// sum_k coeffs[k] z^k.
LevelFunction polynomial(std::vector<double> coeffs);

/// L_slow applied to g o z at p, with intrinsic rate a.
double slow_generator_apply(const LevelFunction& g, const SimplexPoint& p,
                            double a);

/// Coefficients (c1, c2) such that L_slow(g o z)(p) = c1 g'(z) + c2 g''(z).
Eigen::Vector2d slow_generator_coefficients(const Eigen::Vector3d& x, double a);

}  // namespace slowfast
