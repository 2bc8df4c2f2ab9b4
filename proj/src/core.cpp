#include "slowfast_lv/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slowfast {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kNegativeTolerance = 1e-12;

}  // namespace

SimplexPoint::SimplexPoint(double x1, double x2, double x3)
    : SimplexPoint(Eigen::Vector3d(x1, x2, x3)) {}

SimplexPoint::SimplexPoint(const Eigen::Vector3d& x) : x_(x) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(x_[i])) {
      throw std::domain_error("SimplexPoint: non-finite coordinate");
    }
    if (x_[i] < -kNegativeTolerance) {
      throw std::domain_error("SimplexPoint: negative coordinate " +
                              std::to_string(x_[i]));
    }
    x_[i] = std::max(x_[i], 0.0);
  }
  const double sum = x_.sum();
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::domain_error("SimplexPoint: coordinates sum to " +
                            std::to_string(sum));
  }
  x_ /= sum;
}

SimplexPoint SimplexPoint::centre() {
  return SimplexPoint(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
}

SimplexPoint SimplexPoint::vertex(int i) {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  v[i] = 1.0;
  return SimplexPoint(v);
}

CountState::CountState(std::int64_t n1, std::int64_t n2, std::int64_t n3)
    : counts{n1, n2, n3} {
  if (n1 < 0 || n2 < 0 || n3 < 0) {
    throw std::invalid_argument("CountState: negative count");
  }
}

JumpVector::JumpVector(int i) : source(i) {
  if (i < 0 || i > 2) {
    throw std::invalid_argument("JumpVector: index must be 0, 1 or 2");
  }
}

ModelParams::ModelParams(double a_, std::int64_t n_) : a(a_), n(n_) {
  if (!(a_ >= 0.0) || !std::isfinite(a_)) {
    throw std::invalid_argument("ModelParams: a must be finite and >= 0");
  }
  if (n_ < 0) {
    throw std::invalid_argument("ModelParams: n must be >= 0");
  }
}

SimplexPoint to_point(const CountState& s) {
  const std::int64_t n = s.total();
  if (n <= 0) {
    throw std::invalid_argument("to_point: empty population");
  }
  const double inv = 1.0 / static_cast<double>(n);
  return SimplexPoint(static_cast<double>(s[0]) * inv,
                      static_cast<double>(s[1]) * inv,
                      static_cast<double>(s[2]) * inv);
}

CountState apply_jump(const CountState& s, JumpVector j) {
  if (s[j.source] < 1) {
    throw std::domain_error("apply_jump: source species " +
                            std::to_string(j.source) + " is empty");
  }
  CountState out = s;
  --out.counts[j.source];
  ++out.counts[j.target()];
  return out;
}

CountState nearest_grid_state(const SimplexPoint& p, std::int64_t n) {
  if (n <= 0) {
    throw std::invalid_argument("nearest_grid_state: n must be positive");
  }
  std::array<std::int64_t, 3> c{};
  std::array<double, 3> frac{};
  std::int64_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double scaled = p[i] * static_cast<double>(n);
    c[i] = static_cast<std::int64_t>(std::floor(scaled));
    frac[i] = scaled - static_cast<double>(c[i]);
    assigned += c[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int l, int r) { return frac[l] > frac[r]; });
  for (int k = 0; assigned < n; ++k) {
    ++c[order[k % 3]];
    ++assigned;
  }
  for (int k = 2; assigned > n; k = (k + 2) % 3) {
    if (c[order[k]] > 0) {
      --c[order[k]];
      --assigned;
    }
  }
  return CountState(c[0], c[1], c[2]);
}

std::string to_string(const CountState& s) {
  return "(" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," +
         std::to_string(s[2]) + ")";
}

}  // namespace slowfast
