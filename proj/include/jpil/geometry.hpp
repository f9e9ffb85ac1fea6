#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>

namespace jpil {

// All coordinates are meters in a right-handed East-North-Up frame.
using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

// Wraps an angle in degrees into [-180, 180).
double normalize_degrees(double degrees);

// Headset orientation in the ENU frame, degrees.
//
// Yaw is the heading of the camera's forward axis measured from North towards
// East, pitch lifts the forward axis towards Up, roll turns about the forward
// axis. rotation() maps camera-frame vectors (x = right, y = forward, z = up)
// into ENU, so the identity orientation looks North.
struct OrientationENU {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  static OrientationENU normalized(double roll, double pitch, double yaw);

  Matrix3 rotation() const;
  OrientationENU operator+(const OrientationENU& other) const;
  bool operator==(const OrientationENU&) const = default;
};

// Rotation for roll/pitch/yaw given in radians; shared by the camera model and
// the pose solver so both agree on the convention.
Matrix3 rotation_from_rpy_radians(double roll, double pitch, double yaw);

// Rigid motion p -> rotation * p + translation. Maps session-frame (R')
// coordinates into the reference frame (R).
struct RigidTransform {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vector3& t) {
    return {Matrix3::Identity(), t};
  }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;
  Eigen::Matrix4d matrix() const;

  // Orthonormal with determinant +1 within tol.
  bool is_valid(double tol = 1e-9) const;
};

Point3 apply_transform(const RigidTransform& t, const Point3& p);
RigidTransform invert(const RigidTransform& t);

struct BoundingBox {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  static BoundingBox of(std::span<const Point3> points);
  static BoundingBox around(const Point3& center, const Vector3& half_extent) {
    return {center - half_extent, center + half_extent};
  }

  bool contains(const Point3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Point3 center() const { return 0.5 * (min + max); }
  Vector3 extent() const { return max - min; }
  double longest_side() const { return extent().maxCoeff(); }
  bool valid() const { return (min.array() <= max.array()).all(); }
  void expand(const Point3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
};

// Headset pose in the session frame plus the gaze direction used for
// measurements.
struct HeadsetState {
  Point3 position = Point3::Zero();
  OrientationENU orientation;
  Vector3 gaze = Vector3::UnitY();
};

}  // namespace jpil
