#pragma once

// Two-stage coordinate normalization: per-sample rescale to a23 = 1, then a
// global division by the 99th-percentile point norm of the training split.

#include "bennett/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace bennett {

inline constexpr double kReferenceC99 = 29.44;

namespace detail {

inline void scale_sample_geometry(Sample& s, double factor) {
  for (auto& p : s.positions) p *= factor;
  for (auto& v : s.velocities) v *= factor;
  for (auto& w : s.waypoints) {
    w.p *= factor;
    w.v *= factor;
  }
}

}  // namespace detail

/// Stage 1: multiply lengths, positions and velocities by 1/a23 so that a23
/// becomes exactly 1. Twists and speed ratios are unchanged.
inline Sample stage1_scale(Sample s) {
  if (!(s.a23 > 0.0)) throw std::invalid_argument("stage1_scale: a23 must be positive");
  const double kappa = 1.0 / s.a23;
  s.a12 *= kappa;
  s.a23 = 1.0;
  detail::scale_sample_geometry(s, kappa);
  return s;
}

/// Nearest-rank 99th percentile of per-point Euclidean norms.
inline double compute_c99(std::span<const Sample> training) {
  std::vector<double> norms;
  for (const auto& s : training)
    for (const auto& p : s.positions) norms.push_back(p.norm());
  if (norms.empty()) throw std::invalid_argument("compute_c99: empty training split");
  std::sort(norms.begin(), norms.end());
  const std::size_t n = norms.size();
  const std::size_t rank = (99 * n + 99) / 100;  // ceil(0.99·n), at least 1
  return norms[rank - 1];
}

/// Stage 2: divide a12, positions and velocities by c99. a23 stays at the
/// Stage-1 reference value.
inline Sample stage2_scale(Sample s, double c99) {
  if (!(c99 > 0.0)) throw std::invalid_argument("stage2_scale: c99 must be positive");
  s.a12 /= c99;
  detail::scale_sample_geometry(s, 1.0 / c99);
  return s;
}

/// Normalized a12 for a raw a12 with a23 = 1 − a12.
inline double normalized_a12(double raw_a12, double c99) { return raw_a12 / (1.0 - raw_a12) / c99; }

/// Inverse of normalized_a12.
inline double raw_a12_from_normalized(double a12_norm, double c99) {
  const double ratio = a12_norm * c99;
  return ratio / (1.0 + ratio);
}

struct Split {
  std::vector<std::size_t> train;  // sorted
  std::vector<std::size_t> val;    // sorted
};

/// Seeded Fisher-Yates shuffle (mt19937_64 with rejection sampling, so the
/// result does not depend on the standard library), then floor(0.8·n) train.
inline Split split_indices(std::size_t n, std::uint64_t seed, int train_parts = 8, int total_parts = 10) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(order[i - 1], order[x % bound]);
  }
  const std::size_t n_train = n * train_parts / total_parts;
  Split sp;
  sp.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  sp.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.val.begin(), sp.val.end());
  return sp;
}

struct NormalizedDataset {
  std::vector<Sample> samples;  // same order as the input
  double c99 = 0.0;
  bool c99_forced = false;
  Split split;
  std::uint64_t seed = 0;
};

/// Stage 1 on every sample, c99 from the training split unless forced, then
/// Stage 2 on every sample.
inline NormalizedDataset normalize_dataset(std::vector<Sample> raw, std::uint64_t seed,
                                           std::optional<double> forced_c99 = std::nullopt) {
  NormalizedDataset out;
  out.seed = seed;
  out.split = split_indices(raw.size(), seed);
  for (auto& s : raw) s = stage1_scale(std::move(s));
  if (forced_c99) {
    if (!(*forced_c99 > 0.0)) throw std::invalid_argument("normalize_dataset: c99 must be positive");
    out.c99 = *forced_c99;
    out.c99_forced = true;
  } else {
    std::vector<Sample> train;
    train.reserve(out.split.train.size());
    for (std::size_t i : out.split.train) train.push_back(raw[i]);
    out.c99 = compute_c99(train);
  }
  for (auto& s : raw) s = stage2_scale(std::move(s), out.c99);
  out.samples = std::move(raw);
  return out;
}

}  // namespace bennett
