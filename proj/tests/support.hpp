#pragma once

// Independent oracles shared by the test binaries. None of these call into the
// code they are used to check, except where a fixture has to be produced.

#include "bennett/dataset.hpp"
#include "bennett/normalization.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing_support {

using bennett::BennettParams;
using bennett::Points;
using bennett::Vec3;

using LMat = std::array<std::array<long double, 4>, 4>;

inline LMat dh_long(long double theta, long double a, long double alpha) {
  const long double ct = std::cos(theta), st = std::sin(theta);
  const long double ca = std::cos(alpha), sa = std::sin(alpha);
  return {{{ct, -st * ca, st * sa, a * ct}, {st, ct * ca, -ct * sa, a * st}, {0, sa, ca, 0}, {0, 0, 0, 1}}};
}

inline LMat mul(const LMat& x, const LMat& y) {
  LMat z{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      long double s = 0;
      for (int k = 0; k < 4; ++k) s += x[i][k] * y[k][j];
      z[i][j] = s;
    }
  return z;
}

/// ∞-norm of (T1 T2 T3 T4 − I) over the top three rows, in extended precision.
inline double loop_residual_long(const BennettParams& p, double t1, double t2, double t3, double t4) {
  const LMat m = mul(mul(dh_long(t1, p.a12, p.alpha12), dh_long(t2, p.a23, p.alpha23)),
                     mul(dh_long(t3, p.a12, p.alpha12), dh_long(t4, p.a23, p.alpha23)));
  long double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      const long double d = m[i][j] - (i == j ? 1.0L : 0.0L);
      worst = std::max(worst, std::fabs(d));
    }
  return static_cast<double>(worst);
}

/// Closed-form loop angles: θ3 = −θ1, θ4 = −θ2 and
/// tan(θ1/2)·tan(θ2/2) = sin((α23+α12)/2) / sin((α23−α12)/2).
inline std::array<double, 4> closed_form_angles(const BennettParams& p, double theta1) {
  const double k = std::sin((p.alpha23 + p.alpha12) / 2) / std::sin((p.alpha23 - p.alpha12) / 2);
  const double t2 = 2.0 * std::atan2(k, std::tan(theta1 / 2));
  return {theta1, t2, -theta1, -t2};
}

inline Points circle(int n, double radius = 1.0, double z = 0.0) {
  Points pts;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
  }
  return pts;
}

/// Waypoints of a candidate after Stage 1 and Stage 2 with the given divisor.
inline bennett::Sample normalized_sample(double a12, double alpha12, double c99) {
  const auto out = bennett::run_candidate(a12, alpha12);
  if (!out.sample) throw std::runtime_error("fixture candidate was rejected");
  return bennett::stage2_scale(bennett::stage1_scale(*out.sample), c99);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("bennett_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
