#pragma once

// Bennett 4R constraint algebra: D-H joint transforms, dependent-parameter
// derivation, loop-closure residual and the joint-3 endpoint position.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace bennett {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle to its representative in [0, 2π).
inline double canonical_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2π
  if (r >= kTwoPi) r = 0.0;
  return r;
}

struct HomTransform {
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = r;
    m.topRightCorner<3, 1>() = t;
    return m;
  }

  friend HomTransform operator*(const HomTransform& lhs, const HomTransform& rhs) {
    return {lhs.r * rhs.r, lhs.r * rhs.t + lhs.t};
  }
};

/// Joint transform with zero offset:
///   [cθ  -sθ·cα   sθ·sα  a·cθ]
///   [sθ   cθ·cα  -cθ·sα  a·sθ]
///   [0    sα      cα     0   ]
inline HomTransform dh_transform(double theta, double a, double alpha) {
  if (!std::isfinite(theta) || !std::isfinite(a) || !std::isfinite(alpha)) {
    throw std::invalid_argument("dh_transform: non-finite input");
  }
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  HomTransform out;
  out.r << ct, -st * ca, st * sa,
           st, ct * ca, -ct * sa,
           0.0, sa, ca;
  out.t << a * ct, a * st, 0.0;
  return out;
}

/// Derivative of dh_transform with respect to theta, as a 4x4 matrix whose
/// bottom row is zero.
inline Mat4 dh_transform_dtheta(double theta, double a, double alpha) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Mat4 d;
  d << -st, -ct * ca, ct * sa, -a * st,
        ct, -st * ca, st * sa, a * ct,
        0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0;
  return d;
}

enum class TwistBranch { kPrincipal, kSupplementary };

/// Two free parameters plus the dependents fixed by opposite-link symmetry
/// and the proportionality sin(α12)/a12 = sin(α23)/a23.
struct BennettParams {
  double a12 = 0.5;
  double alpha12 = std::numbers::pi / 2;
  double a23 = 0.5;
  double alpha23 = std::numbers::pi / 2;
  double scale = 1.0;
  TwistBranch branch = TwistBranch::kPrincipal;
};

struct Gate1Rejection {
  double sin_alpha23;  // the out-of-range value (|·| > 1)
};

using DeriveResult = std::variant<BennettParams, Gate1Rejection>;

/// sin(α23) implied by the proportionality relation with a23 = 1 − a12.
inline double implied_sin_alpha23(double a12, double alpha12) {
  return (1.0 - a12) / a12 * std::sin(alpha12);
}

inline DeriveResult derive_dependents(double a12, double alpha12,
                                      TwistBranch branch = TwistBranch::kPrincipal) {
  if (!std::isfinite(a12) || !std::isfinite(alpha12) || !(a12 > 0.0 && a12 < 1.0) ||
      !(alpha12 > 0.0 && alpha12 < kTwoPi)) {
    throw std::invalid_argument("derive_dependents: require 0 < a12 < 1 and 0 < alpha12 < 2pi");
  }
  const double s = implied_sin_alpha23(a12, alpha12);
  if (std::abs(s) > 1.0) return Gate1Rejection{s};

  const double principal = std::asin(s);  // [-π/2, π/2]
  const double alpha23 = branch == TwistBranch::kPrincipal
                             ? canonical_angle(principal)
                             : canonical_angle(std::numbers::pi - principal);
  return BennettParams{a12, alpha12, 1.0 - a12, alpha23, 1.0, branch};
}

/// Throwing convenience for callers that have already gated.
inline BennettParams require_params(double a12, double alpha12,
                                    TwistBranch branch = TwistBranch::kPrincipal) {
  auto r = derive_dependents(a12, alpha12, branch);
  if (auto* p = std::get_if<BennettParams>(&r)) return *p;
  throw std::invalid_argument("require_params: candidate fails the real-solution check");
}

inline bool gate1_accepts(double a12, double alpha12) {
  return std::abs(implied_sin_alpha23(a12, alpha12)) <= 1.0;
}

struct JointAngles {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;

  JointAngles canonical() const {
    return {canonical_angle(theta1), canonical_angle(theta2), canonical_angle(theta3),
            canonical_angle(theta4)};
  }
};

using Residual = Eigen::Matrix<double, 12, 1>;
using ClosureJacobian = Eigen::Matrix<double, 12, 3>;

namespace detail {

inline Residual flatten_top(const Mat4& m) {
  Residual r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) r(4 * i + j) = m(i, j);
  return r;
}

inline std::array<Mat4, 4> loop_transforms(const BennettParams& p, const JointAngles& q) {
  // Opposite links share length and twist: (a12, α12), (a23, α23), (a12, α12), (a23, α23).
  return {dh_transform(q.theta1, p.a12, p.alpha12).matrix(),
          dh_transform(q.theta2, p.a23, p.alpha23).matrix(),
          dh_transform(q.theta3, p.a12, p.alpha12).matrix(),
          dh_transform(q.theta4, p.a23, p.alpha23).matrix()};
}

}  // namespace detail

/// Row-major top 3x4 block of T1·T2·T3·T4 − I.
inline Residual closure_residual(const BennettParams& p, const JointAngles& q) {
  const auto t = detail::loop_transforms(p, q);
  Mat4 m = t[0] * t[1] * t[2] * t[3];
  m -= Mat4::Identity();
  return detail::flatten_top(m);
}

/// Residual together with its analytic derivative with respect to the
/// follower angles (θ2, θ3, θ4).
inline std::pair<Residual, ClosureJacobian> closure_residual_and_jacobian(
    const BennettParams& p, const JointAngles& q) {
  const auto t = detail::loop_transforms(p, q);
  const Mat4 d2 = dh_transform_dtheta(q.theta2, p.a23, p.alpha23);
  const Mat4 d3 = dh_transform_dtheta(q.theta3, p.a12, p.alpha12);
  const Mat4 d4 = dh_transform_dtheta(q.theta4, p.a23, p.alpha23);

  const Mat4 t34 = t[2] * t[3];
  const Mat4 t12 = t[0] * t[1];
  Mat4 m = t12 * t34;
  m -= Mat4::Identity();

  ClosureJacobian jac;
  jac.col(0) = detail::flatten_top(t[0] * d2 * t34);
  jac.col(1) = detail::flatten_top(t12 * d3 * t[3]);
  jac.col(2) = detail::flatten_top(t12 * t[2] * d4);
  return {detail::flatten_top(m), jac};
}

/// Origin of the joint-3 frame in the base frame at joint 1.
inline Vec3 joint3_position(const BennettParams& p, double theta1, double theta2) {
  return (dh_transform(theta1, p.a12, p.alpha12) * dh_transform(theta2, p.a23, p.alpha23)).t;
}

}  // namespace bennett
