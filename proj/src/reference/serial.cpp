#include "jpil/reference.hpp"
#include "jpil/error.hpp"

#include <cmath>
#include <limits>

namespace jpil::serial {

namespace {

std::vector<std::uint32_t> brute_radius(std::span<const Point3> points, const Point3& c, double r) {
  std::vector<std::uint32_t> out;
  const double r2 = r * r;
  for (std::uint32_t j = 0; j < points.size(); ++j) {
    if ((points[j] - c).squaredNorm() <= r2) out.push_back(j);
  }
  return out;
}

}  // namespace

std::vector<OrientedKeypoint> detect_keypoints(const PointCloud& cloud, const KeypointParams& params) {
  if (!(params.r_scale > 0.0)) throw Error(ErrorKind::Validation, "r_scale must be positive");
  if (!(params.k_ratio > 0.0 && params.k_ratio < 1.0)) {
    throw Error(ErrorKind::Validation, "k_ratio must lie in (0, 1)");
  }
  const std::size_t n = cloud.size();
  std::vector<std::vector<std::uint32_t>> neighbors(n);
  std::vector<EigenFeatures> features(n);
  std::vector<std::uint8_t> supported(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    neighbors[i] = brute_radius(cloud.points, cloud.points[i], params.r_scale);
    if (neighbors[i].size() < 5) continue;
    std::vector<Point3> hood;
    for (std::uint32_t j : neighbors[i]) hood.push_back(cloud.points[j]);
    features[i] = eigen_features(hood, cloud.points[i]);
    supported[i] = 1;
  }
  std::vector<OrientedKeypoint> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (is_keypoint(i, features, supported, neighbors[i], params)) {
      out.push_back({cloud.points[i], enu_frame(), features[i], i});
    }
  }
  return out;
}

std::vector<TbscDescriptor> compute_tbsc_batch(const PointCloud& cloud,
                                               std::span<const OrientedKeypoint> keypoints,
                                               double radius, const TbscParams& params) {
  std::vector<TbscDescriptor> out;
  for (const OrientedKeypoint& kp : keypoints) out.push_back(compute_tbsc(cloud, kp, radius, params));
  return out;
}

int hamming(const TbscDescriptor& a, const TbscDescriptor& b) {
  if (a.bits != b.bits) throw Error(ErrorKind::Validation, "descriptor length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.bits; ++i) d += a.bit(i) != b.bit(i);
  return d;
}

std::vector<Match> match_descriptors(const KeypointSet& source, const KeypointSet& target,
                                     double eps_desc) {
  if (!(eps_desc > 0.0 && eps_desc <= 1.0)) {
    throw Error(ErrorKind::Validation, "eps_desc must lie in (0, 1]");
  }
  std::vector<Match> out;
  for (std::uint32_t s = 0; s < source.size(); ++s) {
    for (std::uint32_t t = 0; t < target.size(); ++t) {
      const int d = serial::hamming(source.descriptors[s], target.descriptors[t]);
      if (d < static_cast<double>(source.descriptors[s].bits) * eps_desc) {
        out.push_back({s, t, source.keypoints[s].position, target.keypoints[t].position, d});
      }
    }
  }
  return out;
}

SphericalRender render_spherical(const TriangleMesh& mesh, const Point3& position,
                                 const OrientationENU& orientation, const RenderParams& params) {
  if (params.width <= 0 || params.height <= 0) {
    throw Error(ErrorKind::Validation, "render size must be positive");
  }
  SphericalRender out;
  out.image = SphericalImage::blank(params.width, params.height);
  out.backtrack.assign(out.image.pixels.size(),
                       Point3::Constant(std::numeric_limits<double>::quiet_NaN()));
  const Matrix3 rot = orientation.rotation();
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      const Vector3 dir = rot * pixel_to_ray_camera(x, y, params.width, params.height);
      double best = std::numeric_limits<double>::infinity();
      std::size_t tri = 0;
      for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const Triangle& t = mesh.triangles[k];
        const auto hit = intersect_triangle(position, dir, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                            mesh.vertices[t[2]]);
        if (hit && *hit < best) {
          best = *hit;
          tri = k;
        }
      }
      if (!std::isfinite(best)) continue;
      const Triangle& t = mesh.triangles[tri];
      const Vector3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                            .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                            .normalized();
      const std::size_t i = out.index(x, y);
      out.backtrack[i] = position + best * dir;
      out.image.pixels[i] = shade(n, dir, params.ambient);
    }
  }
  return out;
}

std::vector<double> sigma_map(const SphericalRender& render, int n) {
  if (n < 1) throw Error(ErrorKind::Validation, "sigma kernel half-width must be >= 1");
  const int w = render.width();
  const int h = render.height();
  std::vector<double> sigma(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!render.valid(x, y)) continue;
      std::vector<Point3> window;
      for (int dy = -n; dy <= n; ++dy) {
        for (int dx = -n; dx <= n; ++dx) {
          const int yy = y + dy;
          const int xx = ((x + dx) % w + w) % w;
          if (yy >= 0 && yy < h && render.valid(xx, yy)) window.push_back(render.backtrack[render.index(xx, yy)]);
        }
      }
      if (window.size() < 4) continue;
      Point3 c = Point3::Zero();
      for (const Point3& p : window) c += p;
      c /= static_cast<double>(window.size());
      double sq = 0.0;
      for (const Point3& p : window) sq += (p - c).squaredNorm();
      sigma[render.index(x, y)] = std::sqrt(sq / static_cast<double>(window.size()));
    }
  }
  return sigma;
}

std::optional<PoseEstimate> ransac_snp(std::span<const Correspondence3d2d> corrs,
                                       const OrientationENU& q_prior, double eps_q,
                                       const Point3& x_init, const RansacOptions& ransac,
                                       const SnpOptions& options) {
  if (corrs.size() < 4) {
    throw Error(ErrorKind::Validation, "RANSAC pose solve needs at least 4 correspondences");
  }
  if (ransac.iterations < 1) throw Error(ErrorKind::Validation, "RANSAC needs >= 1 iteration");
  std::optional<PoseVector> best;
  std::size_t best_score = 0;
  for (const auto& sample : ransac_samples(corrs.size(), ransac)) {
    const auto pose = ransac_hypothesis(corrs, sample, q_prior, eps_q, x_init, options);
    if (!pose) continue;
    const std::size_t score = count_inliers(corrs, *pose, ransac.inlier_threshold, options);
    if (!best || score > best_score) {
      best = pose;
      best_score = score;
    }
  }
  if (!best || best_score < 4) return std::nullopt;
  return ransac_finish(corrs, q_prior, eps_q, *best, ransac, options);
}

}  // namespace jpil::serial
