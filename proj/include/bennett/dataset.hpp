#pragma once

// End-to-end dataset generation: candidate grid, the three validity gates and
// assembly of accepted samples.

#include "bennett/closure_solver.hpp"
#include "bennett/kinematics.hpp"
#include "bennett/parallel.hpp"
#include "bennett/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bennett {

inline constexpr double kDeg = std::numbers::pi / 180.0;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

struct GridConfig {
  std::array<Interval, 2> a12_intervals{{{0.02, 0.48}, {0.52, 0.98}}};
  std::array<Interval, 2> alpha12_intervals{{{5.0 * kDeg, 178.0 * kDeg}, {185.0 * kDeg, 355.0 * kDeg}}};
  int n_a = 263;
  int n_alpha = 263;

  void validate() const {
    if (n_a < 2 || n_alpha < 2) throw std::invalid_argument("GridConfig: n_a, n_alpha >= 2");
  }
};

/// Uniform values over a two-interval union; counts are split in proportion
/// to interval length and each part includes both of its endpoints.
inline std::vector<double> union_linspace(const std::array<Interval, 2>& ivs, int n) {
  const double total = ivs[0].length() + ivs[1].length();
  int n0 = static_cast<int>(std::lround(n * ivs[0].length() / total));
  n0 = std::clamp(n0, 1, n - 1);
  const std::array<int, 2> counts{n0, n - n0};
  std::vector<double> out;
  out.reserve(n);
  for (int s = 0; s < 2; ++s) {
    const Interval iv = ivs[s];
    const int m = counts[s];
    if (m == 1) {
      out.push_back(0.5 * (iv.lo + iv.hi));
      continue;
    }
    for (int k = 0; k < m; ++k) {
      // pin the last point to the endpoint exactly
      out.push_back(k == m - 1 ? iv.hi : iv.lo + (iv.hi - iv.lo) * k / (m - 1));
    }
  }
  return out;
}

struct GridIndex {
  int i = 0;  // a12 axis
  int j = 0;  // alpha12 axis
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct Candidate {
  GridIndex index;
  double a12 = 0.0;
  double alpha12 = 0.0;
};

/// Cartesian product ordered by (i, j).
inline std::vector<Candidate> build_grid(const GridConfig& cfg) {
  cfg.validate();
  const auto as = union_linspace(cfg.a12_intervals, cfg.n_a);
  const auto bs = union_linspace(cfg.alpha12_intervals, cfg.n_alpha);
  std::vector<Candidate> out;
  out.reserve(as.size() * bs.size());
  for (int i = 0; i < static_cast<int>(as.size()); ++i)
    for (int j = 0; j < static_cast<int>(bs.size()); ++j) out.push_back({{i, j}, as[i], bs[j]});
  return out;
}

struct PipelineConfig {
  SolverConfig solver;
  int frames = kDefaultFrames;
  int fc = kDefaultCutoff;
  double gate2 = kGate2Threshold;  // minimum converged fraction
  Gate3Config gate3;
};

struct Sample {
  GridIndex grid_index;
  double a12 = 0.0;
  double alpha12 = 0.0;
  double a23 = 0.0;
  double alpha23 = 0.0;
  double converged_fraction = 0.0;
  Points positions;   // 64 frames
  Points velocities;  // 64 frames
  Waypoints waypoints;
};

enum class Verdict { kAccepted, kGate1, kGate2, kGate3 };

struct ForwardOutcome {
  Verdict verdict = Verdict::kGate1;
  BennettParams params;
  double converged_fraction = 0.0;
  std::optional<FilteredTrajectory> filtered;  // present once Gate 2 passes
  std::optional<Gate3Result> gate3;
  std::optional<Sample> sample;                // present when accepted
};

/// Runs one candidate through the gates. A Gate-2 failure on the principal
/// twist branch is retried once on the supplementary branch.
inline ForwardOutcome run_candidate(double a12, double alpha12, const PipelineConfig& cfg = {},
                                    GridIndex index = {}) {
  ForwardOutcome out;
  auto derived = derive_dependents(a12, alpha12);
  if (std::holds_alternative<Gate1Rejection>(derived)) {
    out.verdict = Verdict::kGate1;
    return out;
  }
  BennettParams params = std::get<BennettParams>(derived);
  RawSweep sw = sweep(params, cfg.solver, cfg.frames);
  if (sw.converged_fraction < cfg.gate2) {
    params = std::get<BennettParams>(derive_dependents(a12, alpha12, TwistBranch::kSupplementary));
    RawSweep retry = sweep(params, cfg.solver, cfg.frames);
    sw = std::move(retry);
  }
  out.params = params;
  out.converged_fraction = sw.converged_fraction;
  if (sw.converged_fraction < cfg.gate2) {
    out.verdict = Verdict::kGate2;
    return out;
  }

  out.filtered = lowpass_dft(fill_gaps(sw, cfg.gate2), cfg.fc);
  out.gate3 = gate3_check(*out.filtered, cfg.gate3);
  if (!out.gate3->pass) {
    out.verdict = Verdict::kGate3;
    return out;
  }

  const ProcessedTrajectory proc = process(*out.filtered);
  Sample s;
  s.grid_index = index;
  s.a12 = params.a12;
  s.alpha12 = params.alpha12;
  s.a23 = params.a23;
  s.alpha23 = params.alpha23;
  s.converged_fraction = sw.converged_fraction;
  s.positions = proc.positions;
  s.velocities = proc.velocities;
  s.waypoints = extract_waypoints(proc);
  out.sample = std::move(s);
  out.verdict = Verdict::kAccepted;
  return out;
}

struct GateReport {
  long long candidates = 0;
  long long gate1_rejects = 0;
  long long gate2_rejects = 0;
  long long gate3_rejects = 0;
  long long accepted = 0;

  double pass_rate() const {
    return candidates == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(candidates);
  }

  void tally(Verdict v) {
    ++candidates;
    switch (v) {
      case Verdict::kAccepted: ++accepted; break;
      case Verdict::kGate1: ++gate1_rejects; break;
      case Verdict::kGate2: ++gate2_rejects; break;
      case Verdict::kGate3: ++gate3_rejects; break;
    }
  }
};

struct GenerationResult {
  std::vector<Sample> samples;  // ordered by grid index
  GateReport report;
};

inline GenerationResult generate(const GridConfig& grid, const PipelineConfig& cfg = {},
                                 int workers = 1) {
  const auto candidates = build_grid(grid);
  struct Slot {
    Verdict verdict = Verdict::kGate1;
    std::optional<Sample> sample;
  };
  auto slots = ordered_parallel_map(candidates.size(), workers, [&](std::size_t k) {
    const Candidate& c = candidates[k];
    ForwardOutcome o = run_candidate(c.a12, c.alpha12, cfg, c.index);
    return Slot{o.verdict, std::move(o.sample)};
  });

  GenerationResult out;
  for (auto& s : slots) {
    out.report.tally(s.verdict);
    if (s.sample) out.samples.push_back(std::move(*s.sample));
  }
  return out;
}

}  // namespace bennett
