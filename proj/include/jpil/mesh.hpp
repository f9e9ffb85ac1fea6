#pragma once

#include "jpil/geometry.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace jpil {

using Triangle = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }
  BoundingBox bounds() const;
  double triangle_area(std::size_t i) const;

  // Removes triangles whose area is at most `tolerance` (m^2). Returns the
  // number removed. Index validity is checked first.
  std::size_t drop_degenerate(double tolerance = 1e-12);

  void append(const TriangleMesh& other);
  void add_triangle(const Point3& a, const Point3& b, const Point3& c);
};

struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

double triangle_area(const Point3& a, const Point3& b, const Point3& c);

// Sum of triangle areas (cross-product formula), m^2.
double surface_area(const TriangleMesh& mesh);

// Area-weighted uniform sampling. The point count is round(density * area);
// a triangle is picked with probability proportional to its area and a point
// is drawn uniformly inside it. Deterministic for a fixed seed.
PointCloud sample_mesh(const TriangleMesh& mesh, double density, std::uint64_t seed);

// Points with min <= p <= max componentwise, order preserved.
PointCloud clip_box(const PointCloud& cloud, const BoundingBox& box);

// Part of the surface inside the box; triangles crossing the box are cut.
TriangleMesh clip_mesh(const TriangleMesh& mesh, const BoundingBox& box);

// Splits triangles until no edge is longer than max_edge.
TriangleMesh subdivide(const TriangleMesh& mesh, double max_edge);

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidTransform& t);
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

// Appends the 12 triangles of an oriented box with outward-facing winding.
void append_box(TriangleMesh& mesh, const Point3& center, const Vector3& half_extent,
                const Matrix3& rotation = Matrix3::Identity());

}  // namespace jpil
