#pragma once

#include "jpil/mesh.hpp"

#include <optional>
#include <vector>

namespace jpil {

struct RayHit {
  Point3 point;
  double distance = 0.0;
  std::uint32_t triangle = 0;
};

// Moller-Trumbore test; returns the ray parameter of a hit with t > t_min.
std::optional<double> intersect_triangle(const Point3& origin, const Vector3& dir,
                                         const Point3& a, const Point3& b,
                                         const Point3& c, double t_min = 1e-9);

// Bounding-volume hierarchy over a triangle mesh for nearest-hit queries.
// Hits are resolved to the smallest ray parameter, ties to the lowest triangle
// index, so results equal an exhaustive scan.
class Bvh {
 public:
  explicit Bvh(const TriangleMesh& mesh);

  std::optional<RayHit> intersect(const Point3& origin, const Vector3& unit_dir) const;

  const TriangleMesh& mesh() const { return mesh_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
    std::uint32_t first = 0;  // child index (inner) or first primitive (leaf)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end,
                      std::vector<Eigen::Vector3d>& centroids);

  TriangleMesh mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

// Nearest intersection with positive ray parameter. Throws on a zero direction.
std::optional<Point3> raycast(const Bvh& bvh, const Point3& origin, const Vector3& direction);
std::optional<Point3> raycast(const TriangleMesh& mesh, const Point3& origin,
                              const Vector3& direction);

}  // namespace jpil
