#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace slowfast {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double h_initial = 1e-3;
  double h_max = std::numeric_limits<double>::infinity();
  /// Steps shorter than this (relative to max(1, |t|)) abort integration.
  double h_min_relative = 1e-14;
  std::size_t max_steps = 50'000'000;
};

enum class Crossing { Rising, Falling, Either };

struct EventHit {
  double t;
  Eigen::VectorXd y;
};

/// Dormand-Prince 5(4) embedded pair with local extrapolation and the
/// classical step-size controller. The right-hand side is any callable
/// `void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)`.
template <typename Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, OdeOptions opt = {}) : rhs_(std::move(rhs)), opt_(opt) {}

  const OdeOptions& options() const { return opt_; }

  /// One trial step of size h; returns the 5th-order solution and writes the
  /// scaled error norm.
  Eigen::VectorXd trial_step(double t, const Eigen::VectorXd& y, double h,
                             double& err_norm) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    const Eigen::Index n = y.size();
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_}) {
      k->resize(n);
    }
    rhs_(t, y, k1_);
    rhs_(t + c2 * h, y + h * (a21 * k1_), k2_);
    rhs_(t + c3 * h, y + h * (a31 * k1_ + a32 * k2_), k3_);
    rhs_(t + c4 * h, y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_), k4_);
    rhs_(t + c5 * h, y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_), k5_);
    rhs_(t + h,
         y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_), k6_);
    Eigen::VectorXd y_new =
        y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs_(t + h, y_new, k7_);
    const Eigen::VectorXd err =
        h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    const Eigen::VectorXd scale =
        (opt_.abs_tol +
         opt_.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array())
            .matrix();
    err_norm = (err.array() / scale.array()).abs().maxCoeff();
    return y_new;
  }

  /// Integrates from (t0, y0) to t1, calling observer(t, y) after every
  /// accepted step (including the final one, which lands exactly on t1).
  template <typename Observer>
  Eigen::VectorXd integrate(double t0, Eigen::VectorXd y, double t1,
                            Observer&& observer) {
    if (!(t1 >= t0)) {
      throw std::invalid_argument("integrate: t1 must be >= t0");
    }
    double t = t0;
    double h = std::min(opt_.h_initial, opt_.h_max);
    std::size_t steps = 0;
    while (t < t1) {
      bool last = false;
      if (t + h >= t1) {
        h = t1 - t;
        last = true;
      }
      double err = 0.0;
      Eigen::VectorXd y_new = trial_step(t, y, h, err);
      if (err <= 1.0 && std::isfinite(err)) {
        t = last ? t1 : t + h;
        y = std::move(y_new);
        observer(t, static_cast<const Eigen::VectorXd&>(y));
        h = next_step(h, err);
      } else {
        h = shrink_step(h, err, t);
      }
      if (++steps > opt_.max_steps) {
        throw IntegrationError("integrate: step budget exhausted");
      }
    }
    return y;
  }

  Eigen::VectorXd integrate(double t0, const Eigen::VectorXd& y0, double t1) {
    return integrate(t0, y0, t1, [](double, const Eigen::VectorXd&) {});
  }

  /// Integrates until the scalar event function changes sign in the
  /// requested direction, or until t_max. The crossing is located by
  /// bisection on the length of the final step, to within `event_tol`.
  /// Sign changes at the very first step start (g(t0)=0) are ignored.
  template <typename Event>
  std::optional<EventHit> integrate_until(double t0, Eigen::VectorXd y,
                                          double t_max, Event&& g,
                                          Crossing direction,
                                          double event_tol = 1e-13) {
    double t = t0;
    double h = std::min(opt_.h_initial, opt_.h_max);
    double g_prev = g(t, y);
    std::size_t steps = 0;
    while (t < t_max) {
      h = std::min(h, t_max - t);
      double err = 0.0;
      Eigen::VectorXd y_new = trial_step(t, y, h, err);
      if (!(err <= 1.0 && std::isfinite(err))) {
        h = shrink_step(h, err, t);
        continue;
      }
      const double g_new = g(t + h, y_new);
      if (crosses(g_prev, g_new, direction)) {
        double lo = 0.0, hi = h;
        Eigen::VectorXd y_hi = y_new;
        while (hi - lo > event_tol * std::max(1.0, std::abs(t))) {
          const double mid = 0.5 * (lo + hi);
          double e = 0.0;
          Eigen::VectorXd y_mid = trial_step(t, y, mid, e);
          if (crosses(g_prev, g(t + mid, y_mid), direction)) {
            hi = mid;
            y_hi = std::move(y_mid);
          } else {
            lo = mid;
          }
        }
        return EventHit{t + hi, y_hi};
      }
      t += h;
      y = std::move(y_new);
      g_prev = g_new;
      h = next_step(h, err);
      if (++steps > opt_.max_steps) {
        throw IntegrationError("integrate_until: step budget exhausted");
      }
    }
    return std::nullopt;
  }

 private:
  static bool crosses(double before, double after, Crossing direction) {
    const bool rising = before < 0.0 && after >= 0.0;
    const bool falling = before > 0.0 && after <= 0.0;
    switch (direction) {
      case Crossing::Rising:
        return rising;
      case Crossing::Falling:
        return falling;
      case Crossing::Either:
        return rising || falling;
    }
    return false;
  }

  double next_step(double h, double err) const {
    const double factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    return std::min(h * factor, opt_.h_max);
  }

  double shrink_step(double h, double err, double t) const {
    const double factor =
        std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9)
                           : 0.1;
    const double h_new = h * factor;
    if (h_new < opt_.h_min_relative * std::max(1.0, std::abs(t))) {
      throw IntegrationError("step size underflow at t = " + std::to_string(t));
    }
    return h_new;
  }

  Rhs rhs_;
  OdeOptions opt_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_;
};

}  // namespace slowfast
