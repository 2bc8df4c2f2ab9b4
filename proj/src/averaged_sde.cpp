#include "slowfast_lv/averaged_sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slowfast_lv/ode.hpp"
#include "slowfast_lv/parallel.hpp"
#include "slowfast_lv/quadrature.hpp"
#include "slowfast_lv/rng.hpp"

namespace slowfast {

namespace {

void require_closed_range(double z, const char* who) {
  if (!(z >= 0.0 && z <= kZMax)) {
    throw std::domain_error(std::string(who) + ": z outside [0, 1/27]");
  }
}

double checked_sqrt(double radicand, const char* who) {
  if (radicand < -1e-14) {
    throw std::domain_error(std::string(who) + ": negative radicand");
  }
  return std::sqrt(std::max(radicand, 0.0));
}

}  // namespace

double drift(double z, double a) {
  require_closed_range(z, "drift");
  return 3.0 * (a * mean_m(z) - z);
}

double diffusion(double z) {
  require_closed_range(z, "diffusion");
  return checked_sqrt(6.0 * z * mean_m(z), "diffusion");
}

SdeCoefficients::SdeCoefficients(double a, const LoopTable& table)
    : a_(a), table_(&table) {
  if (!(a >= 0.0)) {
    throw std::invalid_argument("SdeCoefficients: a must be >= 0");
  }
}

double SdeCoefficients::sigma(double z) const {
  return checked_sqrt(6.0 * z * table_->m(z), "SdeCoefficients::sigma");
}

std::string to_string(BoundaryType t) {
  switch (t) {
    case BoundaryType::Entrance:
      return "entrance";
    case BoundaryType::Regular:
      return "regular";
    case BoundaryType::Exit:
      return "exit";
  }
  return "unknown";
}

BoundaryClassification classify_boundaries(double a) {
  if (!(a >= 0.0)) {
    throw std::invalid_argument("classify_boundaries: a must be >= 0");
  }
  BoundaryClassification c;
  c.a = a;
  c.at_max = BoundaryType::Entrance;
  if (a == 0.0) {
    c.at_zero = BoundaryType::Exit;
  } else if (a < 1.0) {
    c.at_zero = BoundaryType::Regular;
  } else {
    c.at_zero = BoundaryType::Entrance;
  }
  return c;
}

ScaleSpeed::ScaleSpeed(double a) : a_(a) {
  if (!(a >= 0.0)) {
    throw std::invalid_argument("ScaleSpeed: a must be >= 0");
  }
}

double ScaleSpeed::dp(double z) const {
  return -1.0 / (std::pow(z, a_) * action(z));
}

double ScaleSpeed::ds(double z) const {
  return std::pow(z, a_ - 1.0) * period(z) / 3.0;
}

namespace {

template <typename F>
double anchored_integral(F&& f, double z) {
  if (!(z > 0.0 && z < kZMax)) {
    throw std::domain_error("ScaleSpeed: z outside (0, 1/27)");
  }
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  if (z >= ScaleSpeed::kAnchor) {
    return integrate(f, ScaleSpeed::kAnchor, z, opt).value;
  }
  return -integrate(f, z, ScaleSpeed::kAnchor, opt).value;
}

}  // namespace

double ScaleSpeed::p(double z) const {
  return anchored_integral([this](double x) { return dp(x); }, z);
}

double ScaleSpeed::s(double z) const {
  return anchored_integral([this](double x) { return ds(x); }, z);
}

std::vector<FellerIntegrals> feller_ladder(double a, double r,
                                           const std::vector<double>& eps,
                                           BoundarySide side) {
  if (!(r > 0.0 && r < kZMax)) {
    throw std::invalid_argument("feller_ladder: r must be in (0, 1/27)");
  }
  const double r_dist = side == BoundarySide::Lower ? r : kZMax - r;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < r_dist)) {
      throw std::invalid_argument(
          "feller_ladder: eps must lie strictly between the boundary and r");
    }
    if (i > 0 && !(eps[i] < eps[i - 1])) {
      throw std::invalid_argument("feller_ladder: eps must be decreasing");
    }
  }
  const ScaleSpeed ss(a);
  // v = -ln(distance to the boundary); state (P, S, int S dP, int P dS).
  auto rhs = [&](double v, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const double dist = std::exp(-v);
    const double z = side == BoundarySide::Lower ? dist : kZMax - dist;
    const double dz_dv = side == BoundarySide::Lower ? -dist : dist;
    const double dp = ss.dp(z) * dz_dv;
    const double ds = ss.ds(z) * dz_dv;
    dy.resize(4);
    dy << dp, ds, y[1] * dp, y[0] * ds;
  };
  OdeOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-14;
  opt.h_initial = 1e-3;
  DormandPrince solver(rhs, opt);
  std::vector<FellerIntegrals> out;
  double v = -std::log(r_dist);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
  for (double e : eps) {
    const double v_next = -std::log(e);
    y = solver.integrate(v, y, v_next);
    v = v_next;
    FellerIntegrals f;
    f.a = a;
    f.r = r;
    f.eps = e;
    f.side = side;
    f.s_dp = y[2];
    f.p_ds = y[3];
    out.push_back(f);
  }
  return out;
}

FellerIntegrals feller_integrals(double a, double r, double eps, BoundarySide side) {
  return feller_ladder(a, r, {eps}, side).front();
}

BoundaryPolicy policy_for(double a) {
  if (!(a >= 0.0)) {
    throw std::invalid_argument("policy_for: a must be >= 0");
  }
  if (a == 0.0) {
    return BoundaryPolicy::Absorb;
  }
  return a < 1.0 ? BoundaryPolicy::Reflect : BoundaryPolicy::Clamp;
}

std::string to_string(BoundaryPolicy p) {
  switch (p) {
    case BoundaryPolicy::Clamp:
      return "clamp";
    case BoundaryPolicy::Reflect:
      return "reflect";
    case BoundaryPolicy::Absorb:
      return "absorb";
  }
  return "unknown";
}

StepResult em_step(double z, double dt, double gaussian,
                   const SdeCoefficients& coeffs, BoundaryPolicy policy,
                   double z_floor) {
  StepResult out;
  if (policy == BoundaryPolicy::Absorb && z <= 0.0) {
    out.absorbed = true;
    return out;
  }
  double next = z + coeffs.b(z) * dt + coeffs.sigma(z) * std::sqrt(dt) * gaussian;
  out.hit_lower = next <= 0.0;
  out.hit_upper = next >= kZMax;
  switch (policy) {
    case BoundaryPolicy::Clamp:
      next = std::max(next, z_floor);
      break;
    case BoundaryPolicy::Reflect:
      if (next < 0.0) {
        next = -next;
      }
      break;
    case BoundaryPolicy::Absorb:
      if (next <= 0.0) {
        next = 0.0;
        out.absorbed = true;
      }
      break;
  }
  out.z = std::min(next, kZMax);
  return out;
}

SdeEnsemble sde_ensemble(double z0, double a, double t_final, double dt,
                         std::size_t paths, std::uint64_t seed,
                         const SdeEnsembleOptions& options) {
  if (!(z0 > 0.0 && z0 < kZMax)) {
    throw std::invalid_argument("sde_ensemble: z0 must be in (0, 1/27)");
  }
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw std::invalid_argument("sde_ensemble: need dt > 0 and t_final >= 0");
  }
  if (options.brownian_substeps < 1) {
    throw std::invalid_argument("sde_ensemble: brownian_substeps must be >= 1");
  }
  const auto& obs = options.obs_times;
  if (!std::is_sorted(obs.begin(), obs.end()) ||
      (!obs.empty() && (obs.front() < 0.0 || obs.back() > t_final))) {
    throw std::invalid_argument(
        "sde_ensemble: observation times must be sorted within [0, t_final]");
  }
  const auto steps = static_cast<std::int64_t>(std::ceil(t_final / dt - 1e-9));
  std::vector<std::int64_t> obs_step(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    obs_step[k] = static_cast<std::int64_t>(std::ceil(obs[k] / dt - 1e-9));
  }

  SdeEnsemble e;
  e.z0 = z0;
  e.a = a;
  e.t_final = t_final;
  e.dt = dt;
  e.seed = seed;
  e.policy = policy_for(a);
  e.obs_times = obs;
  e.values.assign(paths, std::vector<double>(obs.size(), 0.0));
  e.absorbed.assign(paths, false);
  e.hit_time_lower.assign(paths, std::numeric_limits<double>::infinity());
  e.hit_time_upper.assign(paths, std::numeric_limits<double>::infinity());
  std::vector<char> absorbed(paths, 0);

  const SdeCoefficients coeffs(a);
  const int sub = options.brownian_substeps;
  const double sub_scale = 1.0 / std::sqrt(static_cast<double>(sub));
  parallel_for(paths, options.threads, [&](std::size_t i) {
    Rng rng(derive_stream_seed(seed, i));
    double z = z0;
    std::size_t next_obs = 0;
    auto& row = e.values[i];
    for (std::int64_t k = 0;; ++k) {
      while (next_obs < obs.size() && obs_step[next_obs] == k) {
        row[next_obs++] = z;
      }
      if (k == steps) {
        break;
      }
      double g = 0.0;
      for (int j = 0; j < sub; ++j) {
        g += rng.normal();
      }
      const StepResult r = em_step(z, dt, g * sub_scale, coeffs, e.policy,
                                   options.z_floor);
      const double t = static_cast<double>(k + 1) * dt;
      if (r.hit_lower && !std::isfinite(e.hit_time_lower[i])) {
        e.hit_time_lower[i] = t;
      }
      if (r.hit_upper && !std::isfinite(e.hit_time_upper[i])) {
        e.hit_time_upper[i] = t;
      }
      z = r.z;
      if (r.absorbed) {
        absorbed[i] = 1;
      }
    }
  });
  for (std::size_t i = 0; i < paths; ++i) {
    e.absorbed[i] = absorbed[i] != 0;
  }
  return e;
}

std::vector<double> sde_occupation(double z0, double a, double burn_in,
                                   double horizon, double dt, std::size_t stride,
                                   std::uint64_t seed) {
  if (!(z0 > 0.0 && z0 < kZMax) || !(dt > 0.0) || stride == 0 ||
      !(burn_in >= 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("sde_occupation: invalid arguments");
  }
  const SdeCoefficients coeffs(a);
  const BoundaryPolicy policy = policy_for(a);
  Rng rng(seed);
  const auto burn_steps = static_cast<std::int64_t>(std::ceil(burn_in / dt - 1e-9));
  const auto run_steps = static_cast<std::int64_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(run_steps) / stride + 1);
  double z = z0;
  for (std::int64_t k = 0; k < burn_steps + run_steps; ++k) {
    z = em_step(z, dt, rng.normal(), coeffs, policy).z;
    if (k >= burn_steps && (k - burn_steps) % static_cast<std::int64_t>(stride) == 0) {
      out.push_back(z);
    }
  }
  return out;
}

double avg_generator_apply(const LevelFunction& g, double z, double a) {
  require_closed_range(z, "avg_generator_apply");
  const double m = mean_m(z);
  return 3.0 * (a * m - z) * g.d1(z) + 3.0 * z * m * g.d2(z);
}

}  // namespace slowfast
