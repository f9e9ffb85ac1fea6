#include "jpil/mesh.hpp"
#include "jpil/error.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <tuple>

namespace jpil {

double triangle_area(const Point3& a, const Point3& b, const Point3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

BoundingBox TriangleMesh::bounds() const { return BoundingBox::of(vertices); }

double TriangleMesh::triangle_area(std::size_t i) const {
  const Triangle& t = triangles[i];
  return jpil::triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

std::size_t TriangleMesh::drop_degenerate(double tolerance) {
  const std::size_t before = triangles.size();
  for (const Triangle& t : triangles) {
    for (std::uint32_t idx : t) {
      if (idx >= vertices.size()) {
        throw Error(ErrorKind::Validation, "triangle index " + std::to_string(idx) +
                                               " out of range for " +
                                               std::to_string(vertices.size()) + " vertices");
      }
    }
  }
  std::erase_if(triangles, [&](const Triangle& t) {
    return jpil::triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= tolerance;
  });
  return before - triangles.size();
}

void TriangleMesh::append(const TriangleMesh& other) {
  const auto offset = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const Triangle& t : other.triangles) {
    triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  }
}

void TriangleMesh::add_triangle(const Point3& a, const Point3& b, const Point3& c) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.push_back(a);
  vertices.push_back(b);
  vertices.push_back(c);
  triangles.push_back({base, base + 1, base + 2});
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) area += mesh.triangle_area(i);
  return area;
}

PointCloud sample_mesh(const TriangleMesh& mesh, double density, std::uint64_t seed) {
  if (mesh.empty()) throw Error(ErrorKind::Validation, "cannot sample an empty mesh");
  if (!(density > 0.0)) throw Error(ErrorKind::Validation, "sampling density must be positive");

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }
  const auto count = static_cast<std::size_t>(std::llround(density * total));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const Triangle& t = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const Point3& a = mesh.vertices[t[0]];
    const Point3& b = mesh.vertices[t[1]];
    const Point3& c = mesh.vertices[t[2]];
    cloud.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
  }
  return cloud;
}

PointCloud clip_box(const PointCloud& cloud, const BoundingBox& box) {
  PointCloud out;
  std::copy_if(cloud.points.begin(), cloud.points.end(), std::back_inserter(out.points),
               [&](const Point3& p) { return box.contains(p); });
  return out;
}

namespace {

using Polygon = std::vector<Point3>;

// Sutherland-Hodgman against the half-space sign * (p[axis] - bound) <= 0.
Polygon clip_polygon(const Polygon& in, int axis, double bound, double sign) {
  Polygon out;
  if (in.empty()) return out;
  auto inside = [&](const Point3& p) { return sign * (p[axis] - bound) <= 0.0; };
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Point3& cur = in[i];
    const Point3& prev = in[(i + in.size() - 1) % in.size()];
    const bool cur_in = inside(cur);
    const bool prev_in = inside(prev);
    if (cur_in != prev_in) {
      const double s = (bound - prev[axis]) / (cur[axis] - prev[axis]);
      Point3 x = prev + s * (cur - prev);
      x[axis] = bound;
      out.push_back(x);
    }
    if (cur_in) out.push_back(cur);
  }
  return out;
}

struct PointLess {
  bool operator()(const Point3& a, const Point3& b) const {
    return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
  }
};

// Merges bit-identical vertices so shared edges stay connected.
TriangleMesh weld(const TriangleMesh& mesh) {
  TriangleMesh out;
  std::map<Point3, std::uint32_t, PointLess> index;
  auto lookup = [&](const Point3& p) {
    auto [it, inserted] = index.try_emplace(p, static_cast<std::uint32_t>(out.vertices.size()));
    if (inserted) out.vertices.push_back(p);
    return it->second;
  };
  for (const Triangle& t : mesh.triangles) {
    out.triangles.push_back(
        {lookup(mesh.vertices[t[0]]), lookup(mesh.vertices[t[1]]), lookup(mesh.vertices[t[2]])});
  }
  return out;
}

}  // namespace

TriangleMesh clip_mesh(const TriangleMesh& mesh, const BoundingBox& box) {
  TriangleMesh out;
  for (const Triangle& t : mesh.triangles) {
    Polygon poly{mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    BoundingBox tb = BoundingBox::of(poly);
    if ((tb.max.array() < box.min.array()).any() || (tb.min.array() > box.max.array()).any()) {
      continue;
    }
    for (int axis = 0; axis < 3 && !poly.empty(); ++axis) {
      poly = clip_polygon(poly, axis, box.max[axis], 1.0);
      poly = clip_polygon(poly, axis, box.min[axis], -1.0);
    }
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      if (triangle_area(poly[0], poly[i], poly[i + 1]) > 1e-12) {
        out.add_triangle(poly[0], poly[i], poly[i + 1]);
      }
    }
  }
  return weld(out);
}

TriangleMesh subdivide(const TriangleMesh& mesh, double max_edge) {
  if (!(max_edge > 0.0)) throw Error(ErrorKind::Validation, "max_edge must be positive");
  TriangleMesh out;
  std::vector<std::array<Point3, 3>> stack;
  for (const Triangle& t : mesh.triangles) {
    stack.push_back({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]});
    while (!stack.empty()) {
      const auto tri = stack.back();
      stack.pop_back();
      int longest = 0;
      double best = -1.0;
      for (int e = 0; e < 3; ++e) {
        const double len = (tri[(e + 1) % 3] - tri[e]).norm();
        if (len > best) {
          best = len;
          longest = e;
        }
      }
      if (best <= max_edge) {
        out.add_triangle(tri[0], tri[1], tri[2]);
        continue;
      }
      const Point3& a = tri[longest];
      const Point3& b = tri[(longest + 1) % 3];
      const Point3& c = tri[(longest + 2) % 3];
      // Midpoint in canonical order so both triangles sharing the edge agree bitwise.
      const Point3 m = PointLess{}(a, b) ? Point3(0.5 * (a + b)) : Point3(0.5 * (b + a));
      stack.push_back({a, m, c});
      stack.push_back({m, b, c});
    }
  }
  return weld(out);
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidTransform& t) {
  TriangleMesh out = mesh;
  for (Point3& v : out.vertices) v = t.apply(v);
  return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out = cloud;
  for (Point3& p : out.points) p = t.apply(p);
  return out;
}

void append_box(TriangleMesh& mesh, const Point3& center, const Vector3& half_extent,
                const Matrix3& rotation) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int i = 0; i < 8; ++i) {
    const Vector3 corner((i & 1) ? half_extent.x() : -half_extent.x(),
                         (i & 2) ? half_extent.y() : -half_extent.y(),
                         (i & 4) ? half_extent.z() : -half_extent.z());
    mesh.vertices.push_back(center + rotation * corner);
  }
  // Corner bits: 1 = +x, 2 = +y, 4 = +z. Counter-clockwise seen from outside.
  static constexpr std::array<Triangle, 12> kFaces{{
      {0, 2, 1}, {1, 2, 3},  // -z
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  }};
  for (const Triangle& f : kFaces) mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
}

}  // namespace jpil
