#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace slowfast {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes by Newton iteration on the Legendre recurrence; cached per order.
const GaussLegendreRule& gauss_legendre(std::size_t order);

template <typename F>
double gauss_legendre_panel(F&& f, double a, double b,
                            const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  return sum * half;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  std::size_t order = 16;
  std::size_t max_panels = 20000;
};

/// Globally adaptive composite Gauss-Legendre quadrature.
///
/// Each panel carries the one-panel estimate and the two-half-panel
/// estimate; their difference is the panel's error indicator. The panel
/// with the largest indicator is bisected until the summed indicator meets
/// max(abs_tol, rel_tol * |value|).
template <typename F>
QuadratureResult integrate(F&& f, double a, double b,
                           const QuadratureOptions& opt = {}) {
  struct Panel {
    double a, b, whole, left, right;
    double value() const { return left + right; }
    double error() const { return std::abs(left + right - whole); }
    bool operator<(const Panel& o) const { return error() < o.error(); }
  };
  const GaussLegendreRule& rule = gauss_legendre(opt.order);
  auto make_panel = [&](double lo, double hi, double whole) {
    const double mid = 0.5 * (lo + hi);
    return Panel{lo, hi, whole, gauss_legendre_panel(f, lo, mid, rule),
                 gauss_legendre_panel(f, mid, hi, rule)};
  };

  std::priority_queue<Panel> queue;
  Panel first = make_panel(a, b, gauss_legendre_panel(f, a, b, rule));
  double total = first.value();
  double error = first.error();
  queue.push(first);

  QuadratureResult out;
  while (true) {
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (error <= target) {
      out.converged = true;
      break;
    }
    if (queue.size() >= opt.max_panels) {
      break;
    }
    Panel worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      break;  // interval exhausted in floating point
    }
    queue.pop();
    Panel lo = make_panel(worst.a, mid, worst.left);
    Panel hi = make_panel(mid, worst.b, worst.right);
    total += lo.value() + hi.value() - worst.value();
    error += lo.error() + hi.error() - worst.error();
    queue.push(lo);
    queue.push(hi);
  }

  // Re-sum to shed the drift of the incremental updates.
  out.panels = queue.size();
  out.value = 0.0;
  out.error = 0.0;
  while (!queue.empty()) {
    out.value += queue.top().value();
    out.error += queue.top().error();
    queue.pop();
  }
  return out;
}

}  // namespace slowfast
