#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace ambulo {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Quat = Eigen::Quaterniond;

/// Rigid transform: rotation followed by translation. The rotation is kept
/// normalized after every construction and composition.
struct RigidTransform {
  Vec3 translation{Vec3::Zero()};
  Quat rotation{Quat::Identity()};

  RigidTransform() = default;
  RigidTransform(const Vec3& t, const Quat& q) : translation(t), rotation(q.normalized()) {}

  static RigidTransform identity() { return {}; }

  static RigidTransform translate(double x, double y, double z) {
    return {Vec3(x, y, z), Quat::Identity()};
  }

  static RigidTransform rot_z(double radians) {
    return {Vec3::Zero(), Quat(Eigen::AngleAxisd(radians, Vec3::UnitZ()))};
  }

  static RigidTransform from_yaw_deg(const Vec3& t, double yaw_deg) {
    return {t, Quat(Eigen::AngleAxisd(yaw_deg * M_PI / 180.0, Vec3::UnitZ()))};
  }

  RigidTransform inverse() const {
    Quat qi = rotation.conjugate();
    return {-(qi * translation), qi};
  }
};

/// apply(compose(a, b), p) == apply(a, apply(b, p))
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.translation + a.rotation * b.translation, a.rotation * b.rotation};
}

inline Vec3 transform_point(const RigidTransform& x, const Vec3& p) {
  return x.rotation * p + x.translation;
}

/// Translation lerp, rotation shortest-arc slerp. alpha in [0, 1];
/// the endpoints are returned unchanged so stored samples reproduce exactly.
inline RigidTransform blend(const RigidTransform& a, const RigidTransform& b, double alpha) {
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;
  return {(1.0 - alpha) * a.translation + alpha * b.translation,
          a.rotation.slerp(alpha, b.rotation)};
}

inline bool approx_equal(const RigidTransform& a, const RigidTransform& b, double tol = 1e-9) {
  // q and -q are the same rotation
  const double dot = std::abs(a.rotation.dot(b.rotation));
  return (a.translation - b.translation).norm() <= tol && 1.0 - dot <= tol;
}

}  // namespace ambulo
