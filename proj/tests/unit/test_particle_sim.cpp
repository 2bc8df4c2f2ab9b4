#include <doctest.h>

#include <cmath>
#include <map>

#include "slowfast_lv/particle_sim.hpp"

using namespace slowfast;

TEST_CASE("rates on small states") {
  const RateVector r = rates(CountState(1, 1, 1), ModelParams(1.0));
  CHECK(r.r[0] == 2.0);
  CHECK(r.r[1] == 2.0);
  CHECK(r.r[2] == 2.0);
  CHECK(r.total == 6.0);
  const RateVector v = rates(CountState(7, 0, 0), ModelParams(0.0));
  CHECK(v.total == 0.0);
  const RateVector w = rates(CountState(3, 1, 0), ModelParams(0.5));
  CHECK(w.r[0] == 4.5);
  CHECK(w.r[1] == 0.5);
  CHECK(w.r[2] == 0.0);
}

TEST_CASE("vertex is absorbing when a = 0") {
  SsaOptions opt;
  opt.obs_times = {0.0, 0.5, 1.0};
  opt.record_events = true;
  const auto tr = ssa_run(CountState(10, 0, 0), ModelParams(0.0, 10), 1.0, 3, opt);
  CHECK(tr.events.empty());
  CHECK(tr.absorbed);
  CHECK(tr.absorption_time == 0.0);
  CHECK(tr.absorbing_vertex == 0);
  for (const auto& o : tr.observations) {
    CHECK(o.state == CountState(10, 0, 0));
  }
}

TEST_CASE("a = 0 runs end at a vertex") {
  const auto tr = ssa_run(CountState(3, 3, 4), ModelParams(0.0, 10), 1e6, 17);
  CHECK(tr.absorbed);
  CHECK(tr.absorbing_vertex >= 0);
  CHECK(tr.final_state[tr.absorbing_vertex] == 10);
}

TEST_CASE("single particle cycles at rate a") {
  const double a = 0.7;
  SsaOptions opt;
  opt.record_events = true;
  const auto tr = ssa_run(CountState(1, 0, 0), ModelParams(a, 1), 1.5e5, 8, opt);
  const double n = static_cast<double>(tr.events.size());
  REQUIRE(n > 50000);
  const double mean = tr.events.back().t / n;
  CHECK(std::abs(mean - 1.0 / a) < 3.0 * (1.0 / a) / std::sqrt(n));
  for (std::size_t k = 1; k < tr.events.size(); ++k) {
    CHECK(tr.events[k].channel == (tr.events[k - 1].channel + 1) % 3);
  }
}

TEST_CASE("replay from the seed is bit-exact and events are ordered") {
  SsaOptions opt;
  opt.record_events = true;
  opt.obs_times = {0.0, 0.001, 0.002};
  const auto a = ssa_run(CountState(30, 40, 30), ModelParams(0.5, 100), 0.002, 99, opt);
  const auto b = ssa_run(CountState(30, 40, 30), ModelParams(0.5, 100), 0.002, 99, opt);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].t == b.events[k].t);
    CHECK(a.events[k].channel == b.events[k].channel);
    if (k > 0) CHECK(a.events[k].t > a.events[k - 1].t);
  }
  CHECK(a.final_state == b.final_state);
  const auto c = ssa_run(CountState(30, 40, 30), ModelParams(0.5, 100), 0.002, 100, opt);
  const bool same = c.final_state == a.final_state && c.events.size() == a.events.size();
  CHECK_FALSE(same);
}

TEST_CASE("z moves by at most 1/n per jump") {
  const std::int64_t n = 500;
  Rng rng(4);
  double worst = 0.0;
  std::uint64_t count = 0;
  simulate_jumps(CountState(100, 150, 250), 0.3, 5.0, rng,
                 [&](double, int, const CountState& before, const CountState& after) {
                   worst = std::max(worst, std::abs(z_of(to_point(after)) -
                                                    z_of(to_point(before))));
                   return ++count < 1000000;
                 });
  CHECK(count > 100000);
  CHECK(worst <= 1.0 / n);
}

TEST_CASE("generator matrix structure") {
  const RateMatrix q1 = generator_matrix(1, ModelParams(0.8));
  CHECK(q1.rows() == 3);
  for (int r = 0; r < 3; ++r) {
    int off = 0;
    for (RateMatrix::InnerIterator it(q1, r); it; ++it) {
      if (it.col() != r) {
        ++off;
        CHECK(it.value() == 0.8);
      }
    }
    CHECK(off == 1);
  }
  const SimplexGrid grid(2);
  const RateMatrix q2 = generator_matrix(2, ModelParams(1.0));
  const auto row = grid.index(CountState(1, 1, 0));
  CHECK(q2.coeff(row, grid.index(CountState(0, 2, 0))) == 2.0);
  CHECK(q2.coeff(row, grid.index(CountState(1, 0, 1))) == 1.0);
  const Eigen::VectorXd sums = q2 * Eigen::VectorXd::Ones(q2.cols());
  CHECK(sums.cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS(generator_matrix(kMaxGeneratorN + 1, ModelParams(1.0)));
  CHECK_THROWS(generator_matrix(0, ModelParams(1.0)));
}

TEST_CASE("simplex grid indexing is consistent") {
  const SimplexGrid grid(12);
  CHECK(grid.size() == 91);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(grid.index(grid.states()[j]) == j);
  }
}

TEST_CASE("invariant measure closed forms") {
  const GridMeasure u = invariant_measure(7, ModelParams(1.0));
  for (Eigen::Index j = 0; j < u.weights.size(); ++j) {
    CHECK(u.weights[j] == doctest::Approx(1.0 / 36.0).epsilon(1e-13));
  }
  const GridMeasure m = invariant_measure(2, ModelParams(2.0));
  for (std::size_t j = 0; j < m.states.size(); ++j) {
    const auto& s = m.states[j];
    const double raw = (s[0] + 1.0) * (s[1] + 1.0) * (s[2] + 1.0);
    CHECK(m.weights[static_cast<Eigen::Index>(j)] == doctest::Approx(raw / 21.0).epsilon(1e-13));
  }
  CHECK(m.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(invariant_measure(5, ModelParams(0.0)));
}

TEST_CASE("invariant measure is in the left kernel of the generator") {
  for (std::int64_t n : {3, 5, 10, 20}) {
    for (double a : {0.5, 0.7, 1.0, 2.0}) {
      const ModelParams p(a, n);
      const double res = stationarity_residual(invariant_measure(n, p), generator_matrix(n, p));
      CHECK(res <= 1e-12);
    }
  }
}

TEST_CASE("sampling from grid measures") {
  GridMeasure point;
  point.n = 3;
  point.states = SimplexGrid(3).states();
  point.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(point.states.size()));
  point.weights[4] = 1.0;
  for (const auto& s : sample_invariant(point, 100, 1)) {
    CHECK(s == point.states[4]);
  }

  const std::size_t count = 60000;
  std::map<std::int64_t, double> freq;
  for (const auto& s : sample_invariant(invariant_measure(2, ModelParams(1.0)), count, 2)) {
    freq[s[0] * 3 + s[1]] += 1.0 / count;
  }
  CHECK(freq.size() == 6);
  for (const auto& [k, f] : freq) {
    CHECK(std::abs(f - 1.0 / 6.0) < 4.0 / std::sqrt(static_cast<double>(count)));
  }

  const GridMeasure mu = invariant_measure(30, ModelParams(2.0));
  double exact = 0.0, exact2 = 0.0;
  for (std::size_t j = 0; j < mu.states.size(); ++j) {
    const double z = z_of(to_point(mu.states[j]));
    exact += mu.weights[static_cast<Eigen::Index>(j)] * z;
    exact2 += mu.weights[static_cast<Eigen::Index>(j)] * z * z;
  }
  const std::size_t big = 100000;
  double mean = 0.0;
  for (const auto& s : sample_invariant(mu, big, 3)) mean += z_of(to_point(s)) / big;
  const double se = std::sqrt((exact2 - exact * exact) / big);
  CHECK(std::abs(mean - exact) < 3.0 * se);
}

TEST_CASE("long-run occupation matches the invariant measure") {
  const std::int64_t n = 10;
  const ModelParams p(2.0, n);
  const SimplexGrid grid(n);
  const GridMeasure mu = invariant_measure(n, p);
  Eigen::VectorXd occupation = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  Rng rng(21);
  double last_t = 0.0;
  std::uint64_t events = 0;
  const double horizon = 1e7;
  const SsaOutcome out = simulate_jumps(
      CountState(4, 3, 3), p.a, horizon, rng,
      [&](double t, int, const CountState& before, const CountState&) {
        occupation[static_cast<Eigen::Index>(grid.index(before))] += t - last_t;
        last_t = t;
        return ++events < 10000000;
      });
  occupation /= occupation.sum();
  const double tv = 0.5 * (occupation - mu.weights).cwiseAbs().sum();
  CHECK(out.events == 10000000);
  CHECK(tv <= 0.02);
}

TEST_CASE("quadratic operator") {
  const ModelParams p(1.0);
  CHECK(quadratic_operator([](const Eigen::Vector3d&) { return 2.5; }, CountState(4, 5, 6), p) == 0.0);
  CHECK(quadratic_operator([](const Eigen::Vector3d& x) { return z_of(x); }, CountState(9, 0, 0),
                           ModelParams(0.0)) == 0.0);
  // g = x1 at (1,1,1): channel 0 moves x1 by -1/3, channel 2 by +1/3, and
  // each channel has rate factor (1/3)(1/3 + 1/3).
  const double expected = 2.0 * (1.0 / 3.0) * (2.0 / 3.0) * 9.0 * (1.0 / 9.0);
  CHECK(quadratic_operator([](const Eigen::Vector3d& x) { return x[0]; }, CountState(1, 1, 1), p) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("wendel ratio limits and monotonicity") {
  for (double x : {0.0, 0.3, 2.0}) {
    CHECK(wendel_ratio(100, x, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  double prev = wendel_ratio(100, 0.5, 2.0);
  for (std::int64_t n : {1000, 10000}) {
    const double w = wendel_ratio(n, 0.5, 2.0);
    CHECK(w <= prev);
    prev = w;
  }
  CHECK(prev == doctest::Approx(0.5).epsilon(1e-3));
  prev = wendel_ratio(100, 0.5, 0.5);
  for (std::int64_t n : {1000, 10000}) {
    const double w = wendel_ratio(n, 0.5, 0.5);
    CHECK(w > prev);
    CHECK(w < std::sqrt(2.0));
    prev = w;
  }
  CHECK(prev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  // Monotone in n on a grid of (x, a).
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    for (double a : {0.3, 1.7}) {
      double last = wendel_ratio(10, x, a);
      for (std::int64_t n : {100, 1000, 10000}) {
        const double w = wendel_ratio(n, x, a);
        if (a < 1.0) CHECK(w >= last);
        else CHECK(w <= last);
        last = w;
      }
    }
  }
  CHECK_THROWS_AS(wendel_ratio(10, 0.0, 0.5), std::domain_error);
}
