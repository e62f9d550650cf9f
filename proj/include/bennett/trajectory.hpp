#pragma once

// Sweep post-processing: gap filling, DFT low-pass, the branch-jump gate,
// 64-frame subsampling, central-difference velocities and waypoints.

#include "bennett/closure_solver.hpp"
#include "bennett/kinematics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bennett {

using Points = std::vector<Vec3>;

inline constexpr int kSubsampleFrames = 64;
inline constexpr int kDefaultCutoff = 72;
inline constexpr double kGate2Threshold = 0.8;
inline constexpr std::array<int, 3> kWaypointIndices = {0, 21, 42};  // floor(k·64/3)

/// Replaces absent positions by periodic linear interpolation in drive angle
/// between the nearest converged neighbours.
inline Points fill_gaps(const RawSweep& sw, double min_fraction = kGate2Threshold) {
  if (sw.converged_fraction < min_fraction) {
    throw std::invalid_argument("fill_gaps: sweep did not pass the assemblability check");
  }
  const int n = static_cast<int>(sw.positions.size());
  std::vector<int> known;
  for (int k = 0; k < n; ++k)
    if (sw.positions[k]) known.push_back(k);
  if (known.empty()) throw std::invalid_argument("fill_gaps: no converged frames");

  Points out(n);
  for (int k : known) out[k] = *sw.positions[k];
  const int m = static_cast<int>(known.size());
  for (int idx = 0; idx < m; ++idx) {
    const int lo = known[idx];
    const int hi = known[(idx + 1) % m];
    // frames strictly between lo and hi, walking forward with wrap
    int span = (hi - lo + n) % n;
    if (span == 0) span = n;  // a single converged frame
    for (int step = 1; step < span; ++step) {
      const double w = static_cast<double>(step) / span;
      out[(lo + step) % n] = (1.0 - w) * out[lo] + w * out[hi];
    }
  }
  return out;
}

/// Real Fourier series of a periodic sampled curve truncated at harmonic `fc`:
///   p(φ) = c0 + Σ_{h=1..fc} (a_h cos hφ + b_h sin hφ),  φ the drive angle.
struct FourierCurve {
  int frames = 0;
  Vec3 mean = Vec3::Zero();
  std::vector<Vec3> cos_coef;  // a_h, h = 1..fc
  std::vector<Vec3> sin_coef;  // b_h

  int cutoff() const { return static_cast<int>(cos_coef.size()); }

  Vec3 eval(double phi) const {
    Vec3 p = mean;
    for (int h = 1; h <= cutoff(); ++h) {
      p += cos_coef[h - 1] * std::cos(h * phi) + sin_coef[h - 1] * std::sin(h * phi);
    }
    return p;
  }

  /// d p / d φ.
  Vec3 derivative(double phi) const {
    Vec3 v = Vec3::Zero();
    for (int h = 1; h <= cutoff(); ++h) {
      v += h * (sin_coef[h - 1] * std::cos(h * phi) - cos_coef[h - 1] * std::sin(h * phi));
    }
    return v;
  }

  FourierCurve scaled(double factor) const {
    FourierCurve c = *this;
    c.mean *= factor;
    for (auto& v : c.cos_coef) v *= factor;
    for (auto& v : c.sin_coef) v *= factor;
    return c;
  }
};

namespace detail {

/// cos/sin of 2πj/n for j = 0..n-1; the DFT indexes it with (h·k) mod n.
struct TwiddleTable {
  std::vector<double> c, s;
  explicit TwiddleTable(int n) : c(n), s(n) {
    for (int j = 0; j < n; ++j) {
      c[j] = std::cos(kTwoPi * j / n);
      s[j] = std::sin(kTwoPi * j / n);
    }
  }
};

}  // namespace detail

/// Per-axis real DFT keeping harmonics 0..fc.
inline FourierCurve fourier_lowpass(const Points& pts, int fc) {
  const int n = static_cast<int>(pts.size());
  if (n < 1) throw std::invalid_argument("fourier_lowpass: empty input");
  if (fc < 0 || 2 * fc >= n) throw std::invalid_argument("fourier_lowpass: require 0 <= fc < n/2");
  const detail::TwiddleTable tw(n);
  FourierCurve curve;
  curve.frames = n;
  for (const auto& p : pts) curve.mean += p;
  curve.mean /= n;
  curve.cos_coef.assign(fc, Vec3::Zero());
  curve.sin_coef.assign(fc, Vec3::Zero());
  for (int h = 1; h <= fc; ++h) {
    Vec3 a = Vec3::Zero(), b = Vec3::Zero();
    for (int k = 0; k < n; ++k) {
      const int j = static_cast<int>((static_cast<long long>(h) * k) % n);
      a += pts[k] * tw.c[j];
      b += pts[k] * tw.s[j];
    }
    curve.cos_coef[h - 1] = a * (2.0 / n);
    curve.sin_coef[h - 1] = b * (2.0 / n);
  }
  return curve;
}

/// Samples the series back on the n-frame grid.
inline Points synthesize(const FourierCurve& curve) {
  const int n = curve.frames;
  const detail::TwiddleTable tw(n);
  Points out(n, curve.mean);
  for (int k = 0; k < n; ++k) {
    for (int h = 1; h <= curve.cutoff(); ++h) {
      const int j = static_cast<int>((static_cast<long long>(h) * k) % n);
      out[k] += curve.cos_coef[h - 1] * tw.c[j] + curve.sin_coef[h - 1] * tw.s[j];
    }
  }
  return out;
}

struct JumpStats {
  double max_jump = 0.0;
  double mean = 0.0;
  double sigma = 0.0;  // population standard deviation
};

/// Statistics of ‖p_{k+1} − p_k‖ over the closed curve (the pair n−1 → 0 included).
inline JumpStats jump_stats(const Points& pts) {
  JumpStats st;
  const int n = static_cast<int>(pts.size());
  if (n < 2) return st;
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) d[k] = (pts[(k + 1) % n] - pts[k]).norm();
  double sum = 0.0;
  for (double x : d) sum += x;
  st.mean = sum / n;
  double ss = 0.0;
  for (double x : d) ss += (x - st.mean) * (x - st.mean);
  st.sigma = std::sqrt(ss / n);
  st.max_jump = *std::max_element(d.begin(), d.end());
  return st;
}

struct FilteredTrajectory {
  Points points;
  int fc = kDefaultCutoff;
  double max_jump = 0.0;
  double mean_jump = 0.0;
  double sigma = 0.0;
  FourierCurve curve;
};

inline FilteredTrajectory lowpass_dft(const Points& pts, int fc = kDefaultCutoff) {
  FilteredTrajectory out;
  out.fc = fc;
  out.curve = fourier_lowpass(pts, fc);
  out.points = synthesize(out.curve);
  const JumpStats st = jump_stats(out.points);
  out.max_jump = st.max_jump;
  out.mean_jump = st.mean;
  out.sigma = st.sigma;
  return out;
}

struct Gate3Config {
  double sigmas = 3.0;
  // Excess steps below this fraction of the mean step are solver noise, not
  // branch jumps.
  double rel_floor = 1e-3;
};

struct Gate3Result {
  bool pass = true;
  double max_jump = 0.0;
  double tau = 0.0;  // mean + sigmas·σ
};

/// Rejects when the largest inter-frame step exceeds the mean step by more
/// than `sigmas` standard deviations.
inline Gate3Result gate3_check(const FilteredTrajectory& traj, const Gate3Config& cfg = {}) {
  Gate3Result r;
  r.max_jump = traj.max_jump;
  r.tau = traj.mean_jump + cfg.sigmas * traj.sigma;
  if (traj.points.size() <= 2) return r;
  const double excess = traj.max_jump - traj.mean_jump;
  r.pass = !(excess > cfg.sigmas * traj.sigma && excess > cfg.rel_floor * traj.mean_jump);
  return r;
}

/// Frame indices floor(k·n/m), k = 0..m−1.
inline std::vector<int> subsample_indices(int n, int m = kSubsampleFrames) {
  std::vector<int> idx(m);
  for (int k = 0; k < m; ++k) idx[k] = static_cast<int>((static_cast<long long>(k) * n) / m);
  return idx;
}

inline Points subsample64(const FilteredTrajectory& traj) {
  Points out;
  out.reserve(kSubsampleFrames);
  for (int i : subsample_indices(static_cast<int>(traj.points.size()))) out.push_back(traj.points[i]);
  return out;
}

/// v_k = (p_{k+1} − p_{k−1}) / (2Δ) with periodic indexing and Δ = 2π/size.
inline Points central_diff_velocity(const Points& pos) {
  const int n = static_cast<int>(pos.size());
  Points v(n, Vec3::Zero());
  if (n < 2) return v;
  const double delta = kTwoPi / n;
  for (int k = 0; k < n; ++k) {
    v[k] = (pos[(k + 1) % n] - pos[(k + n - 1) % n]) / (2.0 * delta);
  }
  return v;
}

struct ProcessedTrajectory {
  Points positions;
  Points velocities;
  std::vector<double> speed_ratios;
};

/// |v_k| / max_j |v_j|; all zero when the curve does not move.
inline std::vector<double> speed_ratios(const Points& vel) {
  double vmax = 0.0;
  for (const auto& v : vel) vmax = std::max(vmax, v.norm());
  std::vector<double> r(vel.size(), 0.0);
  if (vmax > 0.0)
    for (std::size_t k = 0; k < vel.size(); ++k) r[k] = vel[k].norm() / vmax;
  return r;
}

inline ProcessedTrajectory process(const FilteredTrajectory& traj) {
  ProcessedTrajectory out;
  out.positions = subsample64(traj);
  out.velocities = central_diff_velocity(out.positions);
  out.speed_ratios = speed_ratios(out.velocities);
  return out;
}

struct Waypoint {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double r = 0.0;

  std::array<double, 7> as_array() const { return {p.x(), p.y(), p.z(), v.x(), v.y(), v.z(), r}; }
  static Waypoint from_array(const std::array<double, 7>& a) {
    return {Vec3(a[0], a[1], a[2]), Vec3(a[3], a[4], a[5]), a[6]};
  }
};

using Waypoints = std::array<Waypoint, 3>;

inline Waypoints extract_waypoints(const ProcessedTrajectory& traj) {
  if (traj.positions.size() != kSubsampleFrames || traj.velocities.size() != kSubsampleFrames) {
    throw std::invalid_argument("extract_waypoints: expected a 64-frame trajectory");
  }
  Waypoints w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int k = kWaypointIndices[i];
    w[i] = {traj.positions[k], traj.velocities[k], traj.speed_ratios[k]};
  }
  return w;
}

/// Drive-angle offsets of the waypoint frames within an n-frame sweep.
inline std::array<double, 3> waypoint_drive_offsets(int frames = kDefaultFrames) {
  const auto idx = subsample_indices(frames);
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = drive_angle(idx[kWaypointIndices[i]], frames);
  return out;
}

}  // namespace bennett
