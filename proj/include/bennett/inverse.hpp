#pragma once

// Classical inverse design: recover (a12, α12) from three waypoints by a
// coarse grid × phase scan followed by pattern-search refinement.
//
// All candidate trajectories are produced by the same forward pipeline as the
// dataset and mapped to normalized coordinates with the dataset's c99, so the
// reported parameters are directly comparable with dataset labels.

#include "bennett/dataset.hpp"
#include "bennett/metrics.hpp"
#include "bennett/normalization.hpp"
#include "bennett/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace bennett {

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

struct InverseConfig {
  int coarse_na = 48;
  int coarse_nalpha = 96;
  int phase_steps = 64;
  int refine_iters = 100;
  bool use_velocity = false;
  int top_k = 5;
  double c99 = kReferenceC99;  // must match the dataset the waypoints come from
  int workers = 1;
  GridConfig search_region;  // intervals only; counts come from coarse_*
  PipelineConfig pipeline;

  void validate() const {
    if (coarse_na < 2 || coarse_nalpha < 2 || phase_steps < 1 || refine_iters < 0 || top_k < 1 ||
        !(c99 > 0.0)) {
      throw std::invalid_argument("InverseConfig: counts must be >= 1 (coarse >= 2) and c99 > 0");
    }
  }
};

/// A feasible candidate's trajectory as a band-limited curve in normalized
/// coordinates.
struct CandidateModel {
  double a12 = 0.0;  // raw
  double alpha12 = 0.0;
  FourierCurve curve;
};

/// Forward pipeline for one raw candidate; empty when any gate rejects it.
inline std::optional<CandidateModel> build_model(double a12, double alpha12, double c99,
                                                 const PipelineConfig& pipeline = {}) {
  if (!(a12 > 0.0 && a12 < 1.0) || !(alpha12 > 0.0 && alpha12 < kTwoPi)) return std::nullopt;
  const ForwardOutcome o = run_candidate(a12, alpha12, pipeline);
  if (o.verdict != Verdict::kAccepted) return std::nullopt;
  const double factor = 1.0 / (o.params.a23 * c99);
  return CandidateModel{a12, alpha12, o.filtered->curve.scaled(factor)};
}

namespace detail {

inline double velocity_term(const Vec3& model_v, const Vec3& wp_v) {
  const double nm = model_v.norm(), nw = wp_v.norm();
  if (nm == 0.0 || nw == 0.0) return 1.0;
  return 1.0 - model_v.dot(wp_v) / (nm * nw);
}

}  // namespace detail

/// Σ_k ‖p_model(phase + δ_k) − p_wp,k‖² (+ Σ_k (1 − cos∠(v_model, v_wp,k)) when
/// use_velocity), with δ_k the drive-angle offsets of the waypoint frames.
inline double model_objective(const CandidateModel& m, double phase, const Waypoints& wps,
                              bool use_velocity, int frames = kDefaultFrames) {
  const auto offsets = waypoint_drive_offsets(frames);
  double f = 0.0;
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const double phi = phase + offsets[k];
    f += (m.curve.eval(phi) - wps[k].p).squaredNorm();
    if (use_velocity) f += detail::velocity_term(m.curve.derivative(phi), wps[k].v);
  }
  return f;
}

inline double waypoint_objective(const BennettParams& params, double phase, const Waypoints& wps,
                                 const InverseConfig& cfg = {}) {
  const auto m = build_model(params.a12, params.alpha12, cfg.c99, cfg.pipeline);
  if (!m) return kInfeasible;
  return model_objective(*m, phase, wps, cfg.use_velocity, cfg.pipeline.frames);
}

struct InverseCandidate {
  double a12_hat = 0.0;  // normalized
  double alpha12_hat = 0.0;
  double phase_hat = 0.0;
  double objective = kInfeasible;
  double seed_objective = kInfeasible;  // coarse-scan value before refinement
  double a12_raw = 0.0;
  GridIndex seed_index;
};

struct InverseResult {
  bool found = false;
  double a12_hat = 0.0;
  double alpha12_hat = 0.0;
  double objective = kInfeasible;
  double phase_hat = 0.0;
  long long candidates_evaluated = 0;
  std::vector<InverseCandidate> finalists;  // refined seeds, best first
};

/// Holds the coarse candidate bank so repeated solves share the forward runs.
class InverseDesigner {
 public:
  explicit InverseDesigner(InverseConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build_bank();
  }

  const InverseConfig& config() const { return cfg_; }
  std::size_t feasible_candidates() const { return bank_.size(); }
  long long bank_evaluations() const { return bank_evaluations_; }

  InverseResult solve(const Waypoints& wps) const {
    InverseResult res;
    res.candidates_evaluated = bank_evaluations_;
    if (bank_.empty()) return res;

    // Coarse scan: best phase per candidate.
    struct Seed {
      double objective;
      std::size_t bank_idx;
      double phase;
    };
    std::vector<Seed> seeds;
    seeds.reserve(bank_.size());
    for (std::size_t b = 0; b < bank_.size(); ++b) {
      const auto& e = bank_[b];
      double best = kInfeasible, best_phase = 0.0;
      for (int j = 0; j < cfg_.phase_steps; ++j) {
        double f = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          const std::size_t slot = static_cast<std::size_t>(j) * 3 + k;
          f += (e.positions[slot] - wps[k].p).squaredNorm();
          if (cfg_.use_velocity) f += detail::velocity_term(e.derivatives[slot], wps[k].v);
        }
        if (f < best) {
          best = f;
          best_phase = kTwoPi * j / cfg_.phase_steps;
        }
      }
      if (std::isfinite(best)) seeds.push_back({best, b, best_phase});
    }
    if (seeds.empty()) return res;
    // ties broken by grid index; bank_ is stored in grid order
    std::sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) {
      return std::tie(x.objective, x.bank_idx) < std::tie(y.objective, y.bank_idx);
    });
    const std::size_t k = std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(cfg_.top_k));

    auto refined = ordered_parallel_map(k, cfg_.workers, [&](std::size_t s) {
      const auto& seed = seeds[s];
      const auto& e = bank_[seed.bank_idx];
      return refine(e, seed.phase, seed.objective, wps);
    });

    for (auto& r : refined) {
      res.candidates_evaluated += r.second;
      res.finalists.push_back(r.first);
    }
    std::stable_sort(res.finalists.begin(), res.finalists.end(),
                     [](const InverseCandidate& x, const InverseCandidate& y) {
                       return x.objective < y.objective;
                     });
    const auto& best = res.finalists.front();
    res.found = std::isfinite(best.objective);
    res.a12_hat = best.a12_hat;
    res.alpha12_hat = best.alpha12_hat;
    res.phase_hat = best.phase_hat;
    res.objective = best.objective;
    return res;
  }

 private:
  struct BankEntry {
    GridIndex index;
    CandidateModel model;
    std::vector<Vec3> positions;    // phase-major: [phase j][waypoint k]
    std::vector<Vec3> derivatives;
    double da = 0.0;                // coarse spacing around this candidate
    double dalpha = 0.0;
  };

  static double spacing(const std::vector<double>& vals, std::size_t i) {
    if (vals.size() < 2) return 0.1;
    if (i + 1 < vals.size()) return vals[i + 1] - vals[i];
    return vals[i] - vals[i - 1];
  }

  void build_bank() {
    GridConfig g = cfg_.search_region;
    g.n_a = cfg_.coarse_na;
    g.n_alpha = cfg_.coarse_nalpha;
    const auto candidates = build_grid(g);
    const auto as = union_linspace(g.a12_intervals, g.n_a);
    const auto bs = union_linspace(g.alpha12_intervals, g.n_alpha);
    const auto offsets = waypoint_drive_offsets(cfg_.pipeline.frames);

    auto models = ordered_parallel_map(candidates.size(), cfg_.workers, [&](std::size_t c) {
      const auto& cand = candidates[c];
      if (!gate1_accepts(cand.a12, cand.alpha12)) return std::optional<BankEntry>{};
      auto m = build_model(cand.a12, cand.alpha12, cfg_.c99, cfg_.pipeline);
      if (!m) return std::optional<BankEntry>{};
      BankEntry e;
      e.index = cand.index;
      e.da = spacing(as, cand.index.i);
      e.dalpha = spacing(bs, cand.index.j);
      e.positions.reserve(static_cast<std::size_t>(cfg_.phase_steps) * 3);
      for (int j = 0; j < cfg_.phase_steps; ++j) {
        for (double off : offsets) {
          const double phi = kTwoPi * j / cfg_.phase_steps + off;
          e.positions.push_back(m->curve.eval(phi));
          e.derivatives.push_back(cfg_.use_velocity ? m->curve.derivative(phi) : Vec3::Zero());
        }
      }
      e.model = std::move(*m);
      return std::optional<BankEntry>{std::move(e)};
    });
    for (const auto& c : candidates)
      if (gate1_accepts(c.a12, c.alpha12)) ++bank_evaluations_;
    for (auto& m : models)
      if (m) bank_.push_back(std::move(*m));
  }

  InverseCandidate make_candidate(const CandidateModel& m, double phase, double objective,
                                  double seed_objective, GridIndex idx) const {
    InverseCandidate c;
    c.a12_raw = m.a12;
    c.a12_hat = normalized_a12(m.a12, cfg_.c99);
    c.alpha12_hat = canonical_angle(m.alpha12);
    c.phase_hat = canonical_angle(phase);
    c.objective = objective;
    c.seed_objective = seed_objective;
    c.seed_index = idx;
    return c;
  }

  /// Coordinate-wise pattern search over (a12, α12, phase). Steps start at
  /// half the coarse spacing and halve whenever a full poll fails.
  std::pair<InverseCandidate, long long> refine(const BankEntry& seed, double phase, double seed_obj,
                                                const Waypoints& wps) const {
    const int frames = cfg_.pipeline.frames;
    CandidateModel cur = seed.model;
    double cur_phase = phase;
    double cur_obj = model_objective(cur, cur_phase, wps, cfg_.use_velocity, frames);
    long long evals = 0;

    std::array<double, 3> step{0.5 * seed.da, 0.5 * seed.dalpha, 0.5 * kTwoPi / cfg_.phase_steps};
    constexpr std::array<double, 3> min_step{1e-9, 1e-9, 1e-9};
    constexpr double kEdge = 1e-4;

    for (int it = 0; it < cfg_.refine_iters; ++it) {
      bool improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double dir : {1.0, -1.0}) {
          const double delta = dir * step[axis];
          if (axis == 2) {
            const double f = model_objective(cur, cur_phase + delta, wps, cfg_.use_velocity, frames);
            if (f < cur_obj) {
              cur_obj = f;
              cur_phase = canonical_angle(cur_phase + delta);
              improved = true;
              break;
            }
            continue;
          }
          double a = cur.a12, al = cur.alpha12;
          (axis == 0 ? a : al) += delta;
          if (a < kEdge || a > 1.0 - kEdge || al < kEdge || al > kTwoPi - kEdge) continue;
          ++evals;
          auto m = build_model(a, al, cfg_.c99, cfg_.pipeline);
          if (!m) continue;
          const double f = model_objective(*m, cur_phase, wps, cfg_.use_velocity, frames);
          if (f < cur_obj) {
            cur_obj = f;
            cur = std::move(*m);
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        for (auto& s : step) s *= 0.5;
        if (step[0] < min_step[0] && step[1] < min_step[1] && step[2] < min_step[2]) break;
      }
    }
    return {make_candidate(cur, cur_phase, cur_obj, seed_obj, seed.index), evals};
  }

  InverseConfig cfg_;
  std::vector<BankEntry> bank_;
  long long bank_evaluations_ = 0;
};

inline InverseResult solve_inverse(const Waypoints& wps, const InverseConfig& cfg = {}) {
  return InverseDesigner(cfg).solve(wps);
}

}  // namespace bennett
