#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slowfast_lv/fast_dynamics.hpp"
#include "slowfast_lv/loop_table.hpp"
#include "slowfast_lv/ode.hpp"

using namespace slowfast;

namespace {

const double kCentrePeriod = 2.0 * std::numbers::pi * std::sqrt(3.0);

// High-precision reference values of T, A and m (30-digit adaptive
// quadrature of 2 int dx / (x sqrt((1-x)^2 - 4z/x)) and
// -int sqrt((1-x)^2 - 4z/x) dx between the two lower roots).
struct Reference {
  double z, period, action, m;
};
const Reference kReference[] = {
    {1.0 / 54.0, 12.61963894792909, -0.2155924632691492, 0.0170838852172176},
    {1.0 / 200.0, 16.16494596845474, -0.4047496335465321, 0.02503872480219762},
    {1.0 / 30.0, 11.13907775190735, -0.04077200778373341, 0.003660267814968074},
    {1e-4, 27.6431169329473, -0.4969362483545261, 0.01797685295619603},
    {1e-8, 55.26204509757983, -0.4999994173795629, 0.009047790694258256},
};

// Root of x (1 - x)^2 = 4 z in [lo, hi] by bisection.
double bisect_root(double z, double lo, double hi) {
  auto f = [z](double x) { return x * (1 - x) * (1 - x) - 4 * z; };
  const bool rising = f(lo) < 0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    ((f(mid) < 0) == rising ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

auto flow_rhs() {
  return [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(y.size());
    const Eigen::Vector3d x = y.head<3>();
    dy.head<3>() = vector_field(x);
    if (y.size() == 4) {
      dy[3] = x[1] * dy[0];  // x2 dx1/dt
    }
  };
}

OdeOptions tight() {
  OdeOptions o;
  o.rel_tol = 1e-12;
  o.abs_tol = 1e-14;
  return o;
}

}  // namespace

TEST_CASE("vector field at fixed points and a direct substitution") {
  CHECK(vector_field(SimplexPoint::centre()).norm() < 1e-17);
  for (int i = 0; i < 3; ++i) {
    CHECK(vector_field(SimplexPoint::vertex(i)).norm() == 0.0);
  }
  const Eigen::Vector3d v = vector_field(SimplexPoint(0.5, 0.25, 0.25));
  CHECK(v[0] == 0.0);
  CHECK(v[1] == doctest::Approx(0.0625));
  CHECK(v[2] == doctest::Approx(-0.0625));
}

TEST_CASE("flow conserves z and fixes the centre") {
  const auto traj = integrate_flow(SimplexPoint(0.5, 0.3, 0.2), 20.0, 0.1);
  for (const auto& p : traj.points) {
    CHECK(std::abs(z_of(p) - 0.03) <= 1e-8);
  }
  const auto centre = integrate_flow(SimplexPoint::centre(), 5.0, 0.5);
  for (const auto& p : centre.points) {
    CHECK((p.coords() - SimplexPoint::centre().coords()).norm() < 1e-15);
  }
}

TEST_CASE("flow on an edge stays on it and runs to a vertex") {
  const auto traj = integrate_flow(SimplexPoint(0.5, 0.5, 0.0), 40.0, 0.5);
  for (const auto& p : traj.points) {
    CHECK(p[2] == 0.0);
  }
  CHECK(traj.points.back()[1] > 1.0 - 1e-6);
}

TEST_CASE("loop roots match bisection and satisfy ordering") {
  for (double z : {1e-10, 1e-6, 1e-3, 1.0 / 54.0, 0.03, 1.0 / 27.0 - 1e-6}) {
    const LoopRoots r = loop_roots(z);
    CHECK(0.0 < r.x_min);
    CHECK(r.x_min < r.x_max);
    CHECK(r.x_max < 1.0);
    CHECK(1.0 < r.x_add);
    CHECK(r.x_add <= 4.0 / 3.0);
    CHECK(r.x_min <= 1.0 / 3.0);
    CHECK(r.x_max >= 1.0 / 3.0);
    for (double x : {r.x_min, r.x_max, r.x_add}) {
      CHECK(std::abs(x * (1 - x) * (1 - x) - 4 * z) <= 1e-12);
    }
  }
  const double z = 1.0 / 54.0;
  const LoopRoots r = loop_roots(z);
  CHECK(r.x_min == doctest::Approx(bisect_root(z, 0.0, 1.0 / 3.0)).epsilon(1e-12));
  CHECK(r.x_max == doctest::Approx(bisect_root(z, 1.0 / 3.0, 1.0)).epsilon(1e-12));
  CHECK(r.x_add == doctest::Approx(bisect_root(z, 1.0, 4.0 / 3.0)).epsilon(1e-12));
  CHECK(r.x_max == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("loop roots at the ends of the range") {
  const LoopRoots hi = loop_roots(1.0 / 27.0 - 1e-15);
  CHECK(hi.x_min == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(hi.x_max == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(hi.x_add == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const LoopRoots lo = loop_roots(1e-300);
  CHECK(lo.x_min < 1e-299);
  CHECK(lo.x_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(loop_roots(0.0), std::domain_error);
  CHECK_THROWS_AS(loop_roots(1.0 / 27.0), std::domain_error);
}

TEST_CASE("branch_x2 at the turning points and a quadratic-formula value") {
  const double z = 1.0 / 54.0;
  const LoopRoots r = loop_roots(z);
  for (bool inc : {true, false}) {
    CHECK(branch_x2(r.x_min, z, inc) == doctest::Approx(0.5 * (1 - r.x_min)).epsilon(1e-7));
    CHECK(branch_x2(r.x_max, z, inc) == doctest::Approx(0.5 * (1 - r.x_max)).epsilon(1e-7));
  }
  // x2 (2/3 - x2) = 1/18 at x1 = 1/3.
  const double lower = (2.0 / 3.0 - std::sqrt(4.0 / 9.0 - 4.0 / 18.0)) / 2.0;
  CHECK(branch_x2(1.0 / 3.0, z, true) == doctest::Approx(lower).epsilon(1e-14));
  CHECK(branch_x2(1.0 / 3.0, z, false) == doctest::Approx(2.0 / 3.0 - lower).epsilon(1e-14));
}

TEST_CASE("period, action and m against reference values") {
  for (const auto& ref : kReference) {
    CAPTURE(ref.z);
    CHECK(period(ref.z) == doctest::Approx(ref.period).epsilon(1e-11));
    CHECK(action(ref.z) == doctest::Approx(ref.action).epsilon(1e-11));
    CHECK(mean_m(ref.z) == doctest::Approx(ref.m).epsilon(1e-11));
  }
}

TEST_CASE("period and action from direct integration of the flow") {
  const double z = 1.0 / 54.0;
  const SimplexPoint start = loop_start_point(z);
  Eigen::VectorXd y(4);
  y << start.coords(), 0.0;
  DormandPrince solver(flow_rhs(), tight());
  // x1 is minimal at the start: x3 - x2 falls through 0 at x1's maximum and
  // rises through 0 again after one full loop.
  const Eigen::VectorXd y1 = solver.integrate(0.0, y, 1.0);
  const auto hit = solver.integrate_until(
      1.0, y1, 100.0, [](double, const Eigen::VectorXd& s) { return s[2] - s[1]; },
      Crossing::Rising, 1e-12);
  REQUIRE(hit.has_value());
  CHECK(period(z) == doctest::Approx(hit->t).epsilon(1e-6));
  const Eigen::VectorXd end = solver.integrate(0.0, y, period(z));
  CHECK(action(z) == doctest::Approx(end[3]).epsilon(1e-6));
}

TEST_CASE("period limits") {
  CHECK(period(1.0 / 27.0 - 1e-8) == doctest::Approx(kCentrePeriod).epsilon(1e-4));
  const double r8 = period(1e-8) / (-3.0 * std::log(1e-8));
  const double r4 = period(1e-4) / (-3.0 * std::log(1e-4));
  CHECK(r8 >= 0.85);
  CHECK(r8 <= 1.15);
  CHECK(std::abs(r8 - 1.0) < std::abs(r4 - 1.0));
  // Asymptotic branch below 1e-12 joins the quadrature continuously.
  CHECK(period(1e-12 * (1 + 1e-9)) == doctest::Approx(period(1e-12 * (1 - 1e-9))).epsilon(1e-6));
}

TEST_CASE("action limits and sign") {
  CHECK(std::abs(action(1e-8) + 0.5) <= 1e-3);
  const double ratio = action(1.0 / 27.0 - 1e-5) / (-kCentrePeriod * 1e-5);
  CHECK(ratio >= 0.99);
  CHECK(ratio <= 1.01);
  for (double z = 1e-6; z < 1.0 / 27.0; z += 1.0 / 270.0) {
    CHECK(action(z) < 0.0);
    CHECK(period(z) > 0.0);
    CHECK(mean_m(z) > 0.0);
  }
}

TEST_CASE("m vanishes at both ends") {
  CHECK(mean_m(0.0) == 0.0);
  CHECK(mean_m(1.0 / 27.0) == 0.0);
  CHECK(mean_m(1e-10) == doctest::Approx(0.5 / (-3.0 * std::log(1e-10))).epsilon(0.05));
  CHECK(mean_m(1.0 / 27.0 - 1e-9) < 1e-8);
}

TEST_CASE("derivative of the action is the period") {
  const double lo = 1e-4, hi = 1.0 / 27.0 - 1e-4, h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const double z = lo + (hi - lo) * k / 19.0;
    const double d = (action(z + h) - action(z - h)) / (2 * h);
    CHECK(d == doctest::Approx(period(z)).epsilon(1e-4));
  }
}

TEST_CASE("period grows as z decreases toward 0") {
  double prev = period(1e-3);
  for (double z = 1e-4; z > 1e-14; z /= 10) {
    const double t = period(z);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("a third of a period shifts the coordinates cyclically") {
  for (double z : {1e-4, 0.005, 1.0 / 54.0, 0.03, 1.0 / 27.0 - 1e-4}) {
    CAPTURE(z);
    const double T = period(z);
    std::vector<double> times, shifted;
    for (int k = 0; k < 20; ++k) {
      times.push_back(T * k / 20.0);
      shifted.push_back(T * k / 20.0 + T / 3.0);
    }
    std::vector<double> all = times;
    all.insert(all.end(), shifted.begin(), shifted.end());
    std::sort(all.begin(), all.end());
    const auto pts = flow_at_times(loop_start_point(z), all);
    auto at = [&](double t) {
      const auto it = std::lower_bound(all.begin(), all.end(), t);
      return pts[static_cast<std::size_t>(it - all.begin())];
    };
    for (int k = 0; k < 20; ++k) {
      const SimplexPoint now = at(times[k]);
      const SimplexPoint later = at(shifted[k]);
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(later[i] - now[prev(i)]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("time averages over a loop") {
  const double z = 1.0 / 54.0;
  CHECK(time_average([](const Eigen::Vector3d& x) { return z_of(x); }, z) ==
        doctest::Approx(z).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) {
    const double d = time_average(
        [i](const Eigen::Vector3d& x) {
          return x[i] * x[next(i)] * x[next(i)] - x[i] * x[prev(i)] * x[prev(i)];
        },
        z);
    CHECK(std::abs(d) < 1e-9);
    const double m = time_average(
        [i](const Eigen::Vector3d& x) { return -x[next(i)] * vector_field(x)[i]; }, z);
    CHECK(m == doctest::Approx(mean_m(z)).epsilon(1e-5));
  }
}

TEST_CASE("slow generator at vertices, centre and an interior point") {
  const LevelFunction id = polynomial({0.0, 1.0});
  const LevelFunction cubic = polynomial({0.3, -1.0, 4.0, 7.0});
  for (int i = 0; i < 3; ++i) {
    CHECK(slow_generator_apply(cubic, SimplexPoint::vertex(i), 1.3) == 0.0);
  }
  CHECK(slow_generator_apply(id, SimplexPoint::centre(), 0.0) ==
        doctest::Approx(-1.0 / 9.0).epsilon(1e-14));
  CHECK(slow_generator_apply(id, SimplexPoint::centre(), 2.0) ==
        doctest::Approx(-1.0 / 9.0).epsilon(1e-14));

  // Count-level generator applied to g o z off the grid; its O(1/N) part
  // vanishes in the limit, extrapolated from N and 2N.
  const Eigen::Vector3d x(0.5, 0.3, 0.2);
  const double a = 1.0;
  auto full = [&](double n) {
    const double gz = z_of(x);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d y = x;
      y[i] -= 1.0 / n;
      y[next(i)] += 1.0 / n;
      s += n * n * x[i] * (x[next(i)] + a / n) * (z_of(y) - gz);
    }
    return s;
  };
  const double richardson = 2.0 * full(2e4) - full(1e4);
  CHECK(slow_generator_apply(id, SimplexPoint(x), a) ==
        doctest::Approx(richardson).epsilon(1e-6));
}

TEST_CASE("loop averages of the slow generator give the averaged generator") {
  const std::vector<std::vector<double>> cubics = {
      {0.0, 1.0}, {0.0, 0.0, 1.0}, {1.0, -2.0, 30.0, -200.0}};
  for (double z : {1.0 / 200.0, 1.0 / 54.0, 1.0 / 30.0}) {
    for (double a : {0.0, 1.0, 2.0}) {
      const double m = mean_m(z);
      for (const auto& c : cubics) {
        const LevelFunction g = polynomial(c);
        const double avg = time_average(
            [&](const Eigen::Vector3d& x) { return slow_generator_apply(g, SimplexPoint(x), a); },
            z);
        const double expected = 3 * (a * m - z) * g.d1(z) + 3 * z * m * g.d2(z);
        CHECK(std::abs(avg - expected) <= 1e-5);
      }
    }
  }
}

TEST_CASE("m table agrees with direct quadrature") {
  const LoopTable& table = LoopTable::shared();
  double worst = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double z = (1.0 / 27.0) * k / 400.0;
    worst = std::max(worst, std::abs(table.m(z) - mean_m(z)));
  }
  for (double z = 1e-13; z < 1e-3; z *= 1.7) {
    worst = std::max(worst, std::abs(table.m(z) - mean_m(z)));
  }
  CHECK(worst <= 1e-8);
  CHECK(table.m(0.0) == 0.0);
  CHECK(std::abs(table.m(1.0 / 27.0)) < 1e-12);
  CHECK_THROWS(table.m(-1e-3));
}
