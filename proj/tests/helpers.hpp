#pragma once

#include "jpil/mesh.hpp"

#include <cmath>
#include <random>

namespace jpil::test {

inline RigidTransform random_transform(std::mt19937_64& rng, double max_shift = 10.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-max_shift, max_shift);
  const Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return {q.normalized().toRotationMatrix(), Vector3(u(rng), u(rng), u(rng))};
}

inline Point3 random_point(std::mt19937_64& rng, double extent = 10.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {u(rng), u(rng), u(rng)};
}

// Square in the z = `z` plane split into two triangles.
inline TriangleMesh quad(double size, double z = 0.0) {
  TriangleMesh m;
  m.vertices = {{0, 0, z}, {size, 0, z}, {size, size, z}, {0, size, z}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

// Icosahedron subdivided `levels` times and projected onto the unit sphere.
inline TriangleMesh icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  m.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (auto& v : m.vertices) v.normalize();
  for (int l = 0; l < levels; ++l) {
    TriangleMesh next;
    next.vertices = m.vertices;
    for (const Triangle& tri : m.triangles) {
      std::array<std::uint32_t, 3> mid;
      for (int k = 0; k < 3; ++k) {
        mid[k] = static_cast<std::uint32_t>(next.vertices.size());
        next.vertices.push_back((m.vertices[tri[k]] + m.vertices[tri[(k + 1) % 3]]).normalized());
      }
      next.triangles.push_back({tri[0], mid[0], mid[2]});
      next.triangles.push_back({tri[1], mid[1], mid[0]});
      next.triangles.push_back({tri[2], mid[2], mid[1]});
      next.triangles.push_back({mid[0], mid[1], mid[2]});
    }
    m = std::move(next);
  }
  return m;
}

}  // namespace jpil::test

#include "jpil/cpe.hpp"

namespace jpil::test {

// Points scattered 1-8 m around a camera, observed exactly at 1280x640.
// The first round(n * outliers) entries get random pixels.
inline std::vector<Correspondence3d2d> forward_correspondences(std::mt19937_64& rng,
                                                               const Point3& camera,
                                                               const OrientationENU& q, int n,
                                                               double outliers = 0.0) {
  std::normal_distribution<double> dir(0.0, 1.0);
  std::uniform_real_distribution<double> range(1.0, 8.0), px(0.0, 1279.0), py(0.0, 639.0);
  const Matrix3 rt = q.rotation().transpose();
  std::vector<Correspondence3d2d> out;
  const int bad = static_cast<int>(std::lround(n * outliers));
  for (int k = 0; k < n; ++k) {
    Correspondence3d2d c;
    c.point = camera + range(rng) * Vector3(dir(rng), dir(rng), dir(rng)).normalized();
    c.pixel = k < bad ? Eigen::Vector2d(px(rng), py(rng)) : ray_to_pixel(rt * (c.point - camera), 1280, 640);
    out.push_back(c);
  }
  return out;
}

inline double angle_gap(double a, double b) { return std::abs(normalize_degrees(a - b)); }

}  // namespace jpil::test
