#include "jpil/geometry.hpp"
#include "jpil/error.hpp"

#include <cmath>
#include <numbers>

namespace jpil {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NoRegistration: return "no-registration";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

double normalize_degrees(double degrees) {
  double a = std::fmod(degrees + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  a -= 180.0;
  // fmod can land exactly on 180 after the shift for inputs like -180 - eps.
  if (a >= 180.0) a -= 360.0;
  return a;
}

OrientationENU OrientationENU::normalized(double roll, double pitch, double yaw) {
  return {normalize_degrees(roll), normalize_degrees(pitch), normalize_degrees(yaw)};
}

OrientationENU OrientationENU::operator+(const OrientationENU& o) const {
  return normalized(roll + o.roll, pitch + o.pitch, yaw + o.yaw);
}

Matrix3 rotation_from_rpy_radians(double roll, double pitch, double yaw) {
  // Yaw turns clockwise seen from above (North towards East), hence the sign.
  const Eigen::AngleAxisd rz(-yaw, Vector3::UnitZ());
  const Eigen::AngleAxisd rx(pitch, Vector3::UnitX());
  const Eigen::AngleAxisd ry(roll, Vector3::UnitY());
  return (rz * rx * ry).toRotationMatrix();
}

Matrix3 OrientationENU::rotation() const {
  constexpr double kDeg = std::numbers::pi / 180.0;
  return rotation_from_rpy_radians(roll * kDeg, pitch * kDeg, yaw * kDeg);
}

RigidTransform RigidTransform::inverse() const {
  const Matrix3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Point3 apply_transform(const RigidTransform& t, const Point3& p) { return t.apply(p); }

RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

BoundingBox BoundingBox::of(std::span<const Point3> points) {
  if (points.empty()) return {};
  BoundingBox box{points.front(), points.front()};
  for (const Point3& p : points) box.expand(p);
  return box;
}

}  // namespace jpil
