#pragma once

#include "bennett/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bennett {

/// Folds an angular difference into (−π, π].
inline double wrap(double delta) {
  double r = std::fmod(delta + std::numbers::pi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  double out = r - std::numbers::pi;
  if (out <= -std::numbers::pi) out = std::numbers::pi;
  return out;
}

struct MetricsReport {
  double a12_mae = 0.0;
  double alpha12_mae = 0.0;
  double param_mae = 0.0;
  std::optional<double> traj_mae;  // absent when any prediction lacks a trajectory
  std::optional<double> vel_mae;
  std::size_t n = 0;
};

struct MetricRecord {
  double a12 = 0.0;
  double alpha12 = 0.0;
  std::optional<std::vector<Vec3>> trajectory;
  std::optional<std::vector<Vec3>> velocities;
};

/// Pairwise summation; the split points depend only on the length.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

namespace detail {

/// (1/(T·d)) · ‖a − b‖₁ for T×3 sequences.
inline double per_element_l1(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("metrics: trajectory lengths differ or are empty");
  }
  std::vector<double> terms;
  terms.reserve(a.size() * 3);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (int c = 0; c < 3; ++c) terms.push_back(std::abs(a[k](c) - b[k](c)));
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

}  // namespace detail

inline MetricsReport evaluate(std::span<const MetricRecord> preds, std::span<const MetricRecord> gts) {
  if (preds.size() != gts.size()) throw std::invalid_argument("evaluate: prediction/ground-truth length mismatch");
  MetricsReport rep;
  rep.n = preds.size();
  std::vector<double> da, dalpha, dtraj, dvel;
  bool have_traj = true, have_vel = true;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    const auto& g = gts[i];
    da.push_back(std::abs(p.a12 - g.a12));
    dalpha.push_back(std::abs(wrap(p.alpha12 - g.alpha12)));
    if (p.trajectory && g.trajectory) {
      dtraj.push_back(detail::per_element_l1(*p.trajectory, *g.trajectory));
    } else {
      have_traj = false;
    }
    if (p.velocities && g.velocities) {
      dvel.push_back(detail::per_element_l1(*p.velocities, *g.velocities));
    } else {
      have_vel = false;
    }
  }
  rep.a12_mae = mean_of(da);
  rep.alpha12_mae = mean_of(dalpha);
  rep.param_mae = 0.5 * (rep.a12_mae + rep.alpha12_mae);
  if (have_traj) rep.traj_mae = mean_of(dtraj);
  if (have_vel) rep.vel_mae = mean_of(dvel);
  return rep;
}

}  // namespace bennett
