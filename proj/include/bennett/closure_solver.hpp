#pragma once

// Levenberg-Marquardt solution of the follower angles for a given driving
// angle, and warm-started full-revolution sweeps.

#include "bennett/kinematics.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace bennett {

struct SolverConfig {
  double eps = 1e-6;       // convergence tolerance on the residual ∞-norm
  int max_iter = 200;      // trial steps, accepted or rejected
  double lambda0 = 1e-3;   // initial damping
  int multistart_grid = 4; // per-axis lattice size for frame 0

  void validate() const {
    if (!(eps > 0.0) || max_iter < 1 || !(lambda0 > 0.0) || multistart_grid < 1) {
      throw std::invalid_argument("SolverConfig: eps > 0, max_iter >= 1, lambda0 > 0, grid >= 1");
    }
  }
};

struct FollowerAngles {
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
};

struct FrameSolution {
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
  bool converged = false;
  double residual_norm = 0.0;
  int iterations = 0;

  FollowerAngles angles() const { return {theta2, theta3, theta4}; }
};

inline constexpr int kDefaultFrames = 360;

struct RawSweep {
  BennettParams params;
  std::vector<FrameSolution> frames;
  std::vector<std::optional<Vec3>> positions;  // absent where the frame did not converge
  double converged_fraction = 0.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

/// Driving angle of frame k out of n, uniformly spaced on [0, 2π).
inline double drive_angle(int k, int n) { return kTwoPi * k / n; }

/// Damped Gauss-Newton on ‖closure_residual‖² over (θ2, θ3, θ4). Damping is
/// multiplied by 10 on a rejected step and divided by 10 on an accepted one.
inline FrameSolution solve_frame(const BennettParams& p, double theta1, FollowerAngles init,
                                 const SolverConfig& cfg = {}) {
  if (!gate1_accepts(p.a12, p.alpha12)) {
    throw std::invalid_argument("solve_frame: parameters must pass the real-solution check");
  }
  JointAngles q{theta1, init.theta2, init.theta3, init.theta4};
  auto [r, jac] = closure_residual_and_jacobian(p, q);
  double cost = r.squaredNorm();
  double lambda = cfg.lambda0;

  FrameSolution out;
  int iter = 0;
  while (r.lpNorm<Eigen::Infinity>() > cfg.eps && iter < cfg.max_iter) {
    ++iter;
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d g = jac.transpose() * r;
    Eigen::Matrix3d a = jtj;
    a.diagonal().array() += lambda;
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(a);
    const Eigen::Vector3d step = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      lambda *= 10.0;
      continue;
    }
    const JointAngles trial{theta1, q.theta2 + step(0), q.theta3 + step(1), q.theta4 + step(2)};
    auto [rt, jt] = closure_residual_and_jacobian(p, trial);
    const double trial_cost = rt.squaredNorm();
    if (trial_cost < cost) {
      q = trial;
      r = rt;
      jac = jt;
      cost = trial_cost;
      lambda = std::max(lambda / 10.0, 1e-15);
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) break;  // stagnated
    }
  }
  out.theta2 = canonical_angle(q.theta2);
  out.theta3 = canonical_angle(q.theta3);
  out.theta4 = canonical_angle(q.theta4);
  out.residual_norm = r.lpNorm<Eigen::Infinity>();
  out.converged = out.residual_norm <= cfg.eps;
  out.iterations = iter;
  return out;
}

/// Frame-0 solve from every point of a grid³ lattice over [0, 2π)³; the
/// lowest residual wins, ties going to the earliest lattice point.
inline FrameSolution solve_multistart(const BennettParams& p, double theta1,
                                      const SolverConfig& cfg = {}) {
  const int n = cfg.multistart_grid;
  std::optional<FrameSolution> best;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const FollowerAngles init{drive_angle(i, n), drive_angle(j, n), drive_angle(k, n)};
        const FrameSolution s = solve_frame(p, theta1, init, cfg);
        if (!best || s.residual_norm < best->residual_norm) best = s;
      }
  return *best;
}

/// Full revolution of the driving angle. Frame 0 uses the multistart lattice;
/// frame k > 0 starts from the result of frame k − 1.
inline RawSweep sweep(const BennettParams& p, const SolverConfig& cfg = {},
                      int frames = kDefaultFrames) {
  cfg.validate();
  if (frames < 1) throw std::invalid_argument("sweep: frames must be positive");
  RawSweep out;
  out.params = p;
  out.frames.reserve(frames);
  out.positions.reserve(frames);

  int converged = 0;
  FollowerAngles warm;
  for (int k = 0; k < frames; ++k) {
    const double theta1 = drive_angle(k, frames);
    const FrameSolution s =
        k == 0 ? solve_multistart(p, theta1, cfg) : solve_frame(p, theta1, warm, cfg);
    warm = s.angles();
    out.frames.push_back(s);
    if (s.converged) {
      ++converged;
      out.positions.emplace_back(joint3_position(p, theta1, s.theta2));
    } else {
      out.positions.emplace_back(std::nullopt);
    }
  }
  out.converged_fraction = static_cast<double>(converged) / frames;
  return out;
}

}  // namespace bennett
