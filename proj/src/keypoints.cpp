#include "jpil/keypoints.hpp"
#include "jpil/error.hpp"
#include "jpil/spatial_grid.hpp"

#include <Eigen/Eigenvalues>

namespace jpil {

double EigenFeatures::planar_ratio() const {
  if (!(lambda2d[0] > 0.0)) return 1.0;
  return std::max(lambda2d[1], 0.0) / lambda2d[0];
}

EigenFeatures eigen_features(std::span<const Point3> neighborhood, const Point3& center) {
  if (neighborhood.size() < 5) {
    throw Error(ErrorKind::Degenerate, "eigen features need at least 5 points, got " +
                                           std::to_string(neighborhood.size()));
  }
  Matrix3 m_xyz = Matrix3::Zero();
  for (const Point3& q : neighborhood) {
    const Vector3 d = q - center;
    m_xyz.noalias() += d * d.transpose();
  }
  m_xyz /= static_cast<double>(neighborhood.size());
  const Eigen::Matrix2d m_xy = m_xyz.topLeftCorner<2, 2>();

  EigenFeatures f;
  // Eigen sorts ascending; reverse into descending order.
  Eigen::SelfAdjointEigenSolver<Matrix3> es3(m_xyz);
  for (int i = 0; i < 3; ++i) {
    f.lambda3d[i] = es3.eigenvalues()[2 - i];
    f.evecs3d.col(i) = es3.eigenvectors().col(2 - i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(m_xy);
  for (int i = 0; i < 2; ++i) {
    f.lambda2d[i] = es2.eigenvalues()[1 - i];
    f.evecs2d.col(i) = es2.eigenvectors().col(1 - i);
  }
  const double sum = f.lambda3d.sum();
  f.curvature = sum > 0.0 ? std::clamp(f.lambda3d[2] / sum, 0.0, 1.0 / 3.0) : 0.0;
  return f;
}

bool is_keypoint(std::uint32_t i, const std::vector<EigenFeatures>& features,
                 const std::vector<std::uint8_t>& supported,
                 std::span<const std::uint32_t> neighbors, const KeypointParams& params) {
  if (!supported[i]) return false;
  const EigenFeatures& f = features[i];
  if (!(f.planar_ratio() < params.k_ratio)) return false;
  if (!(f.curvature > params.min_curvature)) return false;
  for (std::uint32_t j : neighbors) {
    if (j == i || !supported[j]) continue;
    const double cj = features[j].curvature;
    if (cj > f.curvature || (cj == f.curvature && j < i)) return false;
  }
  return true;
}

std::vector<OrientedKeypoint> detect_keypoints(const PointCloud& cloud,
                                               const KeypointParams& params) {
  if (!(params.r_scale > 0.0)) throw Error(ErrorKind::Validation, "r_scale must be positive");
  if (!(params.k_ratio > 0.0 && params.k_ratio < 1.0)) {
    throw Error(ErrorKind::Validation, "k_ratio must lie in (0, 1)");
  }
  if (cloud.empty()) return {};

  const auto n = static_cast<std::int64_t>(cloud.size());
  const SpatialGrid grid(cloud.points, params.r_scale);
  std::vector<std::vector<std::uint32_t>> neighbors(cloud.size());
  std::vector<EigenFeatures> features(cloud.size());
  std::vector<std::uint8_t> supported(cloud.size(), 0);

#pragma omp parallel
  {
    std::vector<Point3> hood;
#pragma omp for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
      auto& nb = neighbors[static_cast<std::size_t>(i)];
      grid.radius_search(cloud.points[static_cast<std::size_t>(i)], params.r_scale, nb);
      if (nb.size() < 5) continue;
      hood.clear();
      for (std::uint32_t j : nb) hood.push_back(cloud.points[j]);
      features[static_cast<std::size_t>(i)] =
          eigen_features(hood, cloud.points[static_cast<std::size_t>(i)]);
      supported[static_cast<std::size_t>(i)] = 1;
    }
  }

  std::vector<std::uint8_t> flag(cloud.size(), 0);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::uint32_t>(i);
    flag[u] = is_keypoint(u, features, supported, neighbors[u], params) ? 1 : 0;
  }

  std::vector<OrientedKeypoint> out;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    if (flag[i]) out.push_back({cloud.points[i], enu_frame(), features[i], i});
  }
  return out;
}

}  // namespace jpil
