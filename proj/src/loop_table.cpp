#include "slowfast_lv/loop_table.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slowfast_lv/core.hpp"
#include "slowfast_lv/fast_dynamics.hpp"

namespace slowfast {

namespace {

// theta(27 z) in [0, pi]; theta = 0 at z = 1/27.
double theta_of(double z) {
  const double w = std::clamp(27.0 * z, 0.0, 1.0);
  if (w <= 0.5) {
    return std::numbers::pi - 2.0 * std::asin(std::sqrt(w));
  }
  return 2.0 * std::asin(std::sqrt(1.0 - w));
}

double z_of_theta(double theta) {
  const double c = std::cos(0.5 * theta);
  return c * c / 27.0;
}

double lagrange4(const std::vector<double>& values, double pos) {
  const std::size_t n = values.size();
  const auto cell = static_cast<std::size_t>(std::max(pos, 0.0));
  const std::size_t first = std::min(cell == 0 ? std::size_t{0} : cell - 1, n - 4);
  double out = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double weight = 1.0;
    const double xi = static_cast<double>(first + i);
    for (std::size_t j = 0; j < 4; ++j) {
      if (j != i) {
        const double xj = static_cast<double>(first + j);
        weight *= (pos - xj) / (xi - xj);
      }
    }
    out += weight * values[first + i];
  }
  return out;
}

}  // namespace

LoopTable::LoopTable(std::size_t nodes, double split, double z_floor)
    : split_(split), z_floor_(z_floor) {
  if (nodes < 8) {
    throw std::invalid_argument("LoopTable: need at least 8 nodes per regime");
  }
  if (!(z_floor > 0.0 && z_floor < split && split < kZMax)) {
    throw std::invalid_argument("LoopTable: need 0 < z_floor < split < 1/27");
  }
  theta_split_ = theta_of(split);
  m_upper_.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double theta =
        theta_split_ * static_cast<double>(j) / static_cast<double>(nodes - 1);
    const double z = j == 0 ? kZMax : (j + 1 == nodes ? split : z_of_theta(theta));
    m_upper_[j] = mean_m(z);
  }
  log_floor_ = std::log(z_floor);
  log_step_ = (std::log(split) - log_floor_) / static_cast<double>(nodes - 1);
  q_lower_.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double log_z = log_floor_ + log_step_ * static_cast<double>(j);
    const double z = j + 1 == nodes ? split : std::exp(log_z);
    q_lower_[j] = 1.0 / mean_m(z) + 6.0 * std::log(z);
  }
}

const LoopTable& LoopTable::shared() {
  static const LoopTable table;
  return table;
}

double LoopTable::m(double z) const {
  if (!(z >= 0.0 && z <= kZMax)) {
    throw std::domain_error("LoopTable::m: z outside [0, 1/27]");
  }
  if (z >= split_) {
    const double pos = theta_of(z) / theta_split_ *
                       static_cast<double>(m_upper_.size() - 1);
    return lagrange4(m_upper_, pos);
  }
  if (z == 0.0) {
    return 0.0;
  }
  const double log_z = std::log(z);
  const double q =
      z < z_floor_ ? 0.0 : lagrange4(q_lower_, (log_z - log_floor_) / log_step_);
  return 1.0 / (q - 6.0 * log_z);
}

}  // namespace slowfast
