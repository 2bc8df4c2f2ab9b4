#include "slowfast_lv/fast_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "slowfast_lv/ode.hpp"
#include "slowfast_lv/quadrature.hpp"

namespace slowfast {

namespace {

constexpr double kDiscriminantSlack = 1e-14;
// Inside these margins the quadrature loses resolution (the roots crowd
// together) and the leading asymptotics are exact to working precision.
constexpr double kAsymptoticLow = 1e-12;
constexpr double kAsymptoticHigh = kZMax - 1e-12;
const double kCentrePeriod = 2.0 * std::numbers::pi * std::sqrt(3.0);

OdeOptions flow_options(double dt_max) {
  OdeOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-10;
  opt.h_initial = std::min(1e-2, dt_max);
  opt.h_max = dt_max;
  return opt;
}

auto flow_rhs() {
  return [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = vector_field(y.head<3>());
  };
}

void require_open_range(double z, const char* who) {
  if (!(z > 0.0 && z < kZMax)) {
    throw std::domain_error(std::string(who) + ": z = " + std::to_string(z) +
                            " outside (0, 1/27)");
  }
}

QuadratureOptions loop_quadrature() {
  QuadratureOptions opt;
  opt.rel_tol = 1e-13;
  opt.order = 20;
  return opt;
}

}  // namespace

FlowTrajectory integrate_flow(const SimplexPoint& p0, double t_final,
                              double dt_max) {
  if (!(t_final >= 0.0)) {
    throw std::invalid_argument("integrate_flow: t_final must be >= 0");
  }
  if (!(dt_max > 0.0)) {
    throw std::invalid_argument("integrate_flow: dt_max must be > 0");
  }
  FlowTrajectory traj;
  traj.z0 = z_of(p0);
  traj.times.push_back(0.0);
  traj.points.push_back(p0);
  DormandPrince stepper(flow_rhs(), flow_options(dt_max));
  stepper.integrate(0.0, Eigen::VectorXd(p0.coords()), t_final,
                    [&](double t, const Eigen::VectorXd& y) {
                      traj.times.push_back(t);
                      traj.points.emplace_back(Eigen::Vector3d(y.head<3>()));
                    });
  return traj;
}

std::vector<SimplexPoint> flow_at_times(const SimplexPoint& p0,
                                        const std::vector<double>& times) {
  std::vector<SimplexPoint> out;
  out.reserve(times.size());
  DormandPrince stepper(flow_rhs(), flow_options(0.5));
  Eigen::VectorXd y = p0.coords();
  double t = 0.0;
  for (double target : times) {
    if (target < t) {
      throw std::invalid_argument("flow_at_times: times must be nondecreasing");
    }
    if (target > t) {
      y = stepper.integrate(t, y, target);
      t = target;
    }
    out.emplace_back(Eigen::Vector3d(y.head<3>()));
  }
  return out;
}

LoopRoots loop_roots(double z) {
  require_open_range(z, "loop_roots");
  const double w = 27.0 * z;
  // theta in (0, pi) with cos(theta) = 2w - 1; psi = pi - theta.
  double theta, psi;
  if (w <= 0.5) {
    psi = 2.0 * std::asin(std::sqrt(w));
    theta = std::numbers::pi - psi;
  } else {
    theta = 2.0 * std::asin(std::sqrt(std::max(0.0, 1.0 - w)));
    psi = std::numbers::pi - theta;
  }
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  const double s6 = std::sin(psi / 6.0);
  LoopRoots r;
  r.z = z;
  r.theta = theta;
  r.x_min = 4.0 / 3.0 * s6 * s6;
  r.x_max = 1.0 - 4.0 / 3.0 * std::cos(theta / 6.0) * s6;
  r.x_add = 1.0 + 4.0 / 3.0 * std::sin((theta + std::numbers::pi) / 6.0) * s6;
  r.spread = 2.0 * inv_sqrt3 * std::sin(theta / 3.0);
  r.add_gap = 2.0 * inv_sqrt3 * std::sin(psi / 3.0);
  return r;
}

double branch_x2(double x1, double z, bool increasing) {
  if (!(x1 > 0.0 && x1 < 1.0)) {
    throw std::domain_error("branch_x2: x1 outside (0, 1)");
  }
  double disc = (1.0 - x1) * (1.0 - x1) - 4.0 * z / x1;
  if (disc < -kDiscriminantSlack) {
    throw std::domain_error("branch_x2: x1 = " + std::to_string(x1) +
                            " is not on the level set z = " + std::to_string(z));
  }
  disc = std::max(disc, 0.0);
  const double root = std::sqrt(disc);
  return increasing ? 0.5 * (1.0 - x1 - root) : 0.5 * (1.0 - x1 + root);
}

double period(double z) {
  require_open_range(z, "period");
  if (z < kAsymptoticLow) {
    return -3.0 * std::log(z);
  }
  if (z > kAsymptoticHigh) {
    return kCentrePeriod;
  }
  const LoopRoots r = loop_roots(z);
  // x = x_min + spread sin^2(phi) removes both inverse-square-root endpoint
  // singularities of the x1-transit integral.
  auto integrand = [&](double phi) {
    const double s = std::sin(phi), c = std::cos(phi);
    const double x = r.x_min + r.spread * s * s;
    const double gap = r.add_gap + r.spread * c * c;
    return 1.0 / std::sqrt(x * gap);
  };
  const auto q = integrate(integrand, 0.0, 0.5 * std::numbers::pi,
                           loop_quadrature());
  return 4.0 * q.value;
}

double action(double z) {
  require_open_range(z, "action");
  if (z < kAsymptoticLow) {
    return -0.5;
  }
  if (z > kAsymptoticHigh) {
    return -kCentrePeriod * (kZMax - z);
  }
  const LoopRoots r = loop_roots(z);
  auto integrand = [&](double phi) {
    const double s = std::sin(phi), c = std::cos(phi);
    const double x = r.x_min + r.spread * s * s;
    const double gap = r.add_gap + r.spread * c * c;
    return s * s * c * c * std::sqrt(gap / x);
  };
  const auto q = integrate(integrand, 0.0, 0.5 * std::numbers::pi,
                           loop_quadrature());
  return -2.0 * r.spread * r.spread * q.value;
}

double mean_m(double z) {
  if (z == 0.0 || z == kZMax) {
    return 0.0;
  }
  require_open_range(z, "mean_m");
  return -action(z) / period(z);
}

LoopGeometry loop_geometry(double z) {
  const LoopRoots r = loop_roots(z);
  LoopGeometry g;
  g.z = z;
  g.theta = r.theta;
  g.x_min = r.x_min;
  g.x_max = r.x_max;
  g.x_add = r.x_add;
  g.period = period(z);
  g.action = action(z);
  g.m = -g.action / g.period;
  return g;
}

SimplexPoint loop_start_point(double z) {
  const LoopRoots r = loop_roots(z);
  const double x23 = 0.5 * (1.0 - r.x_min);
  return SimplexPoint(r.x_min, x23, x23);
}

double time_average(const PointFunction& f, double z) {
  const double T = period(z);
  const SimplexPoint start = loop_start_point(z);
  Eigen::VectorXd y(4);
  y << start.coords(), 0.0;
  auto rhs = [&f](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const Eigen::Vector3d x = s.head<3>();
    ds.head<3>() = vector_field(x);
    ds[3] = f(x);
  };
  DormandPrince stepper(rhs, flow_options(0.5));
  const Eigen::VectorXd end = stepper.integrate(0.0, y, T);
  return end[3] / T;
}

LevelFunction polynomial(std::vector<double> coeffs) {
  auto horner = [](const std::vector<double>& c, double z) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
      acc = acc * z + *it;
    }
    return acc;
  };
  std::vector<double> d1, d2;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    d1.push_back(static_cast<double>(k) * coeffs[k]);
  }
  for (std::size_t k = 1; k < d1.size(); ++k) {
    d2.push_back(static_cast<double>(k) * d1[k]);
  }
  return LevelFunction{
      [=](double z) { return horner(coeffs, z); },
      [=](double z) { return horner(d1, z); },
      [=](double z) { return horner(d2, z); },
  };
}

Eigen::Vector2d slow_generator_coefficients(const Eigen::Vector3d& x,
                                            double a) {
  const double z = z_of(x);
  double first = 0.0, second = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double xp = x[prev(i)], xn = x[next(i)];
    first += xp * xp * xn - z;
    second += z * (x[i] * xp * xp + x[i] * xn * xn - 2.0 * z);
  }
  return {a * first - 3.0 * z, 0.5 * second};
}

double slow_generator_apply(const LevelFunction& g, const SimplexPoint& p,
                            double a) {
  const Eigen::Vector2d c = slow_generator_coefficients(p.coords(), a);
  const double z = z_of(p);
  return c[0] * g.d1(z) + c[1] * g.d2(z);
}

}  // namespace slowfast
