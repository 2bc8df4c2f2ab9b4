#include <doctest.h>

#include <cmath>

#include "slowfast_lv/averaged_sde.hpp"
#include "slowfast_lv/quadrature.hpp"
#include "slowfast_lv/stationary_density.hpp"

using namespace slowfast;

namespace {

std::vector<double> decade_ladder() {
  std::vector<double> eps;
  for (int k = 3; k <= 15; ++k) eps.push_back(std::pow(10.0, -k));
  return eps;
}

// Increments between successive rungs of a Feller ladder.
std::vector<double> increments(const std::vector<FellerIntegrals>& ladder, bool s_dp) {
  std::vector<double> d;
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    const double now = s_dp ? ladder[k].s_dp : ladder[k].p_ds;
    const double before = s_dp ? ladder[k - 1].s_dp : ladder[k - 1].p_ds;
    d.push_back(std::abs(now - before));
  }
  return d;
}

bool converges(const std::vector<FellerIntegrals>& ladder, bool s_dp) {
  const auto d = increments(ladder, s_dp);
  const double last = std::abs(s_dp ? ladder.back().s_dp : ladder.back().p_ds);
  return d.back() <= 1e-3 * last && d.back() <= 0.9 * d[d.size() - 2];
}

}  // namespace

TEST_CASE("drift and diffusion coefficients") {
  const double z = 1.0 / 54.0;
  const double m = mean_m(z);
  CHECK(drift(z, 2.0) == doctest::Approx(3.0 * (2.0 * m - z)).epsilon(1e-14));
  CHECK(diffusion(z) == doctest::Approx(std::sqrt(6.0 * z * m)).epsilon(1e-14));
  CHECK(drift(1.0 / 27.0, 1.0) == doctest::Approx(-1.0 / 9.0).epsilon(1e-14));
  CHECK(drift(0.0, 3.0) == 0.0);
  CHECK(diffusion(0.0) == 0.0);
  CHECK(diffusion(1.0 / 27.0) == 0.0);
  CHECK_THROWS(drift(-0.01, 1.0));
  CHECK_THROWS(diffusion(0.04));

  const SdeCoefficients c(2.0);
  for (double y : {1e-9, 1e-4, 0.01, 0.03}) {
    CHECK(c.b(y) == doctest::Approx(drift(y, 2.0)).epsilon(1e-7));
    CHECK(c.sigma(y) == doctest::Approx(diffusion(y)).epsilon(1e-7));
  }
  CHECK_THROWS(SdeCoefficients(-1.0));
}

TEST_CASE("averaged generator on polynomials") {
  const LevelFunction g = polynomial({0.0, 1.0, 2.0});
  const double z = 0.01, a = 1.5;
  const double m = mean_m(z);
  const double expected = 3 * (a * m - z) * (1 + 4 * z) + 3 * z * m * 4;
  CHECK(avg_generator_apply(g, z, a) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("boundary classification by a") {
  CHECK(classify_boundaries(0.0).at_zero == BoundaryType::Exit);
  CHECK(classify_boundaries(0.3).at_zero == BoundaryType::Regular);
  CHECK(classify_boundaries(0.999).at_zero == BoundaryType::Regular);
  CHECK(classify_boundaries(1.0).at_zero == BoundaryType::Entrance);
  CHECK(classify_boundaries(4.0).at_zero == BoundaryType::Entrance);
  for (double a : {0.0, 0.5, 1.0, 3.0}) {
    CHECK(classify_boundaries(a).at_max == BoundaryType::Entrance);
  }
  CHECK(to_string(BoundaryType::Regular) == "regular");
  CHECK(policy_for(0.0) == BoundaryPolicy::Absorb);
  CHECK(policy_for(0.5) == BoundaryPolicy::Reflect);
  CHECK(policy_for(1.0) == BoundaryPolicy::Clamp);
}

TEST_CASE("scale and speed densities factor the generator") {
  for (double a : {0.5, 1.0, 2.0}) {
    const ScaleSpeed ss(a);
    const SdeCoefficients c(a);
    for (double z : {1e-3, 0.01, 1.0 / 54.0, 0.03}) {
      CAPTURE(a);
      CAPTURE(z);
      const double half_var = 0.5 * diffusion(z) * diffusion(z);
      CHECK(ss.dp(z) > 0.0);
      CHECK(ss.ds(z) > 0.0);
      CHECK(ss.dp(z) * ss.ds(z) * half_var == doctest::Approx(1.0).epsilon(1e-10));
      const double h = 1e-6 * z;
      const double log_slope = (std::log(ss.dp(z + h)) - std::log(ss.dp(z - h))) / (2 * h);
      CHECK(-half_var * log_slope == doctest::Approx(drift(z, a)).epsilon(1e-6));
    }
    CHECK(ss.p(ScaleSpeed::kAnchor) == 0.0);
    CHECK(ss.s(ScaleSpeed::kAnchor) == 0.0);
    const double z1 = 0.02, z2 = 0.0201;
    CHECK(ss.p(z2) - ss.p(z1) ==
          doctest::Approx(0.00005 * (ss.dp(z1) + 4 * ss.dp(0.02005) + ss.dp(z2)) / 3.0)
              .epsilon(1e-7));
  }
}

TEST_CASE("feller ladders distinguish the boundary types") {
  const double r = 1.0 / 54.0;
  const auto eps = decade_ladder();

  const auto exit = feller_ladder(0.0, r, eps, BoundarySide::Lower);
  CHECK(converges(exit, true));
  CHECK_FALSE(converges(exit, false));

  const auto regular = feller_ladder(0.5, r, eps, BoundarySide::Lower);
  CHECK(converges(regular, true));
  CHECK(converges(regular, false));

  const auto entrance = feller_ladder(2.0, r, eps, BoundarySide::Lower);
  CHECK_FALSE(converges(entrance, true));
  CHECK(converges(entrance, false));

  for (double a : {0.0, 0.5, 2.0}) {
    const auto upper = feller_ladder(a, r, eps, BoundarySide::Upper);
    CHECK_FALSE(converges(upper, true));
    CHECK(converges(upper, false));
  }

  const auto one = feller_integrals(2.0, r, 1e-6, BoundarySide::Lower);
  CHECK(one.s_dp == doctest::Approx(entrance[3].s_dp).epsilon(1e-8));
  CHECK(one.p_ds == doctest::Approx(entrance[3].p_ds).epsilon(1e-8));
}

TEST_CASE("euler-maruyama step and boundary policies") {
  const SdeCoefficients c2(2.0);
  const double dt = 1e-3;
  const auto centre = em_step(1.0 / 27.0, dt, 0.7, c2, BoundaryPolicy::Clamp);
  CHECK(centre.z == doctest::Approx(1.0 / 27.0 - dt / 9.0).epsilon(1e-12));

  const double z = 0.01;
  const auto plain = em_step(z, dt, 0.3, c2, BoundaryPolicy::Clamp);
  CHECK(plain.z == doctest::Approx(z + c2.b(z) * dt + c2.sigma(z) * std::sqrt(dt) * 0.3)
                       .epsilon(1e-14));
  CHECK_FALSE(plain.hit_lower);

  const SdeCoefficients half(0.5);
  const double y = 1e-6, h = 1e-4;
  const double g = (-1e-5 - y - half.b(y) * h) / (half.sigma(y) * std::sqrt(h));
  const auto reflected = em_step(y, h, g, half, BoundaryPolicy::Reflect);
  CHECK(reflected.z == doctest::Approx(1e-5).epsilon(1e-8));
  CHECK(reflected.hit_lower);
  const auto clamped = em_step(y, h, g, half, BoundaryPolicy::Clamp);
  CHECK(clamped.z == kZFloor);
  const auto absorbed = em_step(y, h, g, half, BoundaryPolicy::Absorb);
  CHECK(absorbed.z == 0.0);
  CHECK(absorbed.absorbed);
  const auto stays = em_step(0.0, h, 1.0, half, BoundaryPolicy::Absorb);
  CHECK(stays.absorbed);
  CHECK(stays.z == 0.0);

  const auto top = em_step(0.037, dt, 40.0, c2, BoundaryPolicy::Clamp);
  CHECK(top.hit_upper);
  CHECK(top.z == kZMax);
}

TEST_CASE("zero noise with a = 0 follows exponential decay") {
  const SdeCoefficients c(0.0);
  const double dt = 1e-4;
  double z = 0.02;
  for (int k = 0; k < 10000; ++k) z = em_step(z, dt, 0.0, c, BoundaryPolicy::Absorb).z;
  CHECK(z == doctest::Approx(0.02 * std::exp(-3.0)).epsilon(1e-3));
}

TEST_CASE("ensembles are reproducible and report observation times") {
  SdeEnsembleOptions opt;
  opt.obs_times = {0.0, 0.05, 0.1};
  const auto e1 = sde_ensemble(0.01, 2.0, 0.1, 1e-3, 50, 7, opt);
  const auto e2 = sde_ensemble(0.01, 2.0, 0.1, 1e-3, 50, 7, opt);
  CHECK(e1.values == e2.values);
  REQUIRE(e1.values.size() == 50);
  REQUIRE(e1.values[0].size() == 3);
  for (const auto& row : e1.values) {
    CHECK(row[0] == 0.01);
    for (double v : row) {
      CHECK(v > 0.0);
      CHECK(v <= kZMax);
    }
  }
  CHECK(e1.policy == BoundaryPolicy::Clamp);
  const auto e3 = sde_ensemble(0.01, 2.0, 0.1, 1e-3, 50, 8, opt);
  CHECK(e3.values != e1.values);
  CHECK_THROWS(sde_ensemble(0.0, 2.0, 0.1, 1e-3, 5, 1));
}

TEST_CASE("entrance boundary is left immediately") {
  SdeEnsembleOptions opt;
  opt.obs_times = {1.0};
  const auto e = sde_ensemble(1e-10, 2.0, 1.0, 1e-4, 200, 3, opt);
  std::size_t away = 0;
  for (const auto& row : e.values) away += row[0] > 1e-4 ? 1 : 0;
  CHECK(away >= 190);
}

TEST_CASE("a = 0 ensembles get absorbed") {
  SdeEnsembleOptions opt;
  opt.obs_times = {8.0};
  const auto e = sde_ensemble(1.0 / 54.0, 0.0, 8.0, 1e-3, 100, 5, opt);
  std::size_t absorbed = 0;
  for (bool b : e.absorbed) absorbed += b ? 1 : 0;
  CHECK(absorbed >= 50);
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    if (e.absorbed[i]) CHECK(e.values[i][0] == 0.0);
  }
}

TEST_CASE("drift has zero mean under the stationary law") {
  for (double a : {1.0, 2.0}) {
    const StationaryDensity density(a);
    const SdeCoefficients coeffs(a);
    const auto mean_b = integrate(
        [&](double z) { return coeffs.b(z) * density.pdf(z); }, 0.0, kZMax);
    CHECK(std::abs(mean_b.value) <= 1e-8);
  }
}
