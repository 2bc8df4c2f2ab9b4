#include "slowfast_lv/stationary_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slowfast_lv/averaged_sde.hpp"
#include "slowfast_lv/quadrature.hpp"

namespace slowfast {

namespace {

// T at z = s^(1/a), extended to the endpoints of (0, s_max).
double period_at(double s, double a, double s_max) {
  if (s <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  if (s >= s_max) {
    return period(std::nextafter(kZMax, 0.0));
  }
  return period(std::min(std::pow(s, 1.0 / a), std::nextafter(kZMax, 0.0)));
}

QuadratureOptions density_quadrature() {
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.order = 16;
  return opt;
}

}  // namespace

double stationary_normalization(double a) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("stationary_normalization: a must be > 0");
  }
  const double s_max = std::pow(kZMax, a);
  auto integrand = [a, s_max](double s) { return period_at(s, a, s_max); };
  return integrate(integrand, 0.0, s_max, density_quadrature()).value / a;
}

StationaryDensity::StationaryDensity(double a, std::size_t table_nodes) : a_(a) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("StationaryDensity: a must be > 0");
  }
  if (table_nodes < 16) {
    throw std::invalid_argument("StationaryDensity: need at least 16 table nodes");
  }
  s_max_ = std::pow(kZMax, a);
  step_ = s_max_ / static_cast<double>(table_nodes - 1);
  cdf_.assign(table_nodes, 0.0);
  slope_.assign(table_nodes, 0.0);
  const double s_max = s_max_;
  auto integrand = [a, s_max](double s) { return period_at(s, a, s_max); };
  // Unnormalized cumulative integral of T(s^(1/a)) ds cell by cell.
  for (std::size_t j = 1; j < table_nodes; ++j) {
    const double lo = step_ * static_cast<double>(j - 1);
    const double hi = j + 1 == table_nodes ? s_max_ : step_ * static_cast<double>(j);
    cdf_[j] = cdf_[j - 1] + integrate(integrand, lo, hi, density_quadrature()).value;
  }
  const double total = cdf_.back();
  norm_ = total / a;
  for (std::size_t j = 0; j < table_nodes; ++j) {
    cdf_[j] /= total;
    slope_[j] = j == 0 ? 0.0 : period_at(step_ * static_cast<double>(j), a, s_max_) / total;
  }
  cdf_.back() = 1.0;
}

double StationaryDensity::pdf(double z) const {
  if (!(z > 0.0 && z < kZMax)) {
    return 0.0;
  }
  return std::pow(z, a_ - 1.0) * period(z) / norm_;
}

double StationaryDensity::cdf(double z) const {
  if (z <= 0.0) {
    return 0.0;
  }
  if (z >= kZMax) {
    return 1.0;
  }
  const double s = std::pow(z, a_);
  const double pos = s / step_;
  const auto j = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
  const double h = step_;
  const double t = pos - static_cast<double>(j);
  if (j == 0) {
    // The slope is log-singular at s = 0; fit alpha s + beta s ln s to the
    // value and slope at the first node.
    if (s <= 0.0) {
      return 0.0;
    }
    const double beta = slope_[1] - cdf_[1] / h;
    const double alpha = cdf_[1] / h - beta * std::log(h);
    return std::clamp(alpha * s + beta * s * std::log(s), 0.0, 1.0);
  }
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double v = h00 * cdf_[j] + h10 * h * slope_[j] + h01 * cdf_[j + 1] +
                   h11 * h * slope_[j + 1];
  return std::clamp(v, 0.0, 1.0);
}

double StationaryDensity::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("StationaryDensity::quantile: u outside [0, 1]");
  }
  if (u == 0.0) {
    return 0.0;
  }
  if (u == 1.0) {
    return kZMax;
  }
  double lo = 0.0, hi = kZMax;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double stationarity_integral(double a, const LevelFunction& f) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("stationarity_integral: a must be > 0");
  }
  const double s_max = std::pow(kZMax, a);
  const double z_top = std::nextafter(kZMax, 0.0);
  // T L_avg f = -3 a A f' - 3 z T f' - 3 z A f'', and in s = z^a the weight
  // z^(a-1) dz becomes ds / a.
  auto integrand = [&](double s) {
    if (s <= 0.0 || s >= s_max) {
      return 0.0;
    }
    const double z = std::min(std::pow(s, 1.0 / a), z_top);
    const double t = period(z), act = action(z);
    const double d1 = f.d1(z), d2 = f.d2(z);
    return (-3.0 * a * act * d1 - 3.0 * z * t * d1 - 3.0 * z * act * d2) / a;
  };
  // The exact value is 0, so the tolerance is absolute, scaled by the size
  // of the integrand.
  double scale = 0.0;
  for (int k = 1; k < 64; ++k) {
    scale = std::max(scale, std::abs(integrand(s_max * k / 64.0)));
  }
  const double norm = stationary_normalization(a);
  QuadratureOptions opt = density_quadrature();
  opt.abs_tol = 1e-11 * std::max(scale * s_max, 1e-300);
  return integrate(integrand, 0.0, s_max, opt).value / norm;
}

}  // namespace slowfast
