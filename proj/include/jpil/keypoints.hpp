#pragma once

#include "jpil/mesh.hpp"

#include <span>
#include <vector>

namespace jpil {

struct EigenFeatures {
  Eigen::Vector3d lambda3d = Eigen::Vector3d::Zero();  // descending, m^2
  Matrix3 evecs3d = Matrix3::Identity();               // columns e1, e2, e3
  Eigen::Vector2d lambda2d = Eigen::Vector2d::Zero();  // descending, m^2
  Eigen::Matrix2d evecs2d = Eigen::Matrix2d::Identity();
  double curvature = 0.0;  // lambda3 / (lambda1 + lambda2 + lambda3)

  // lambda'2 / lambda'1 of the horizontal covariance; 1 when undefined.
  double planar_ratio() const;
};

// Local reference frame fixed to the ENU axes (E, N, E x N) for every keypoint.
inline Matrix3 enu_frame() { return Matrix3::Identity(); }

struct OrientedKeypoint {
  Point3 position = Point3::Zero();
  Matrix3 lrf = enu_frame();
  EigenFeatures features;
  std::uint32_t index = 0;  // index into the source cloud
};

struct KeypointParams {
  double r_scale = 0.4;
  double k_ratio = 0.8;
  // Floor below which a point is treated as planar and never a keypoint.
  double min_curvature = 1e-6;
};

// Covariances are accumulated about the center point (not the centroid) over
// the whole neighborhood, which must include the center itself. Throws
// Error(Degenerate) for fewer than 5 points.
EigenFeatures eigen_features(std::span<const Point3> neighborhood, const Point3& center);

// A point is a keypoint when its horizontal covariance is anisotropic
// (lambda'2/lambda'1 < k_ratio) and its curvature is a strict maximum over all
// neighbors within r_scale, ties going to the lower index. Runs in parallel
// over points; results are independent of thread count.
std::vector<OrientedKeypoint> detect_keypoints(const PointCloud& cloud, const KeypointParams& params);

// Keypoint decision given per-point features and sorted neighbor lists; shared
// by the parallel detector and the serial reference.
bool is_keypoint(std::uint32_t i, const std::vector<EigenFeatures>& features,
                 const std::vector<std::uint8_t>& supported,
                 std::span<const std::uint32_t> neighbors, const KeypointParams& params);

}  // namespace jpil
