#include "jpil/bvh.hpp"
#include "jpil/error.hpp"

#include <algorithm>
#include <limits>

namespace jpil {

namespace {

constexpr std::uint32_t kLeafSize = 4;

inline std::optional<double> moller_trumbore(const Point3& origin, const Vector3& dir,
                                             const Point3& a, const Vector3& e1,
                                             const Vector3& e2, double t_min) {
  const Vector3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Vector3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vector3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t <= t_min) return std::nullopt;
  return t;
}

inline bool slab_hit(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, const Point3& origin,
                     const Vector3& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double a = (lo[k] - origin[k]) * inv_dir[k];
    double b = (hi[k] - origin[k]) * inv_dir[k];
    if (a > b) std::swap(a, b);
    // NaN from 0 * inf keeps the comparison false and leaves the bound untouched.
    if (a > t0) t0 = a;
    if (b < t1) t1 = b;
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::optional<double> intersect_triangle(const Point3& origin, const Vector3& dir, const Point3& a,
                                         const Point3& b, const Point3& c, double t_min) {
  return moller_trumbore(origin, dir, a, b - a, c - a, t_min);
}

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(mesh) {
  const auto n = static_cast<std::uint32_t>(mesh_.triangles.size());
  order_.resize(n);
  std::vector<Eigen::Vector3d> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    order_[i] = i;
    const Triangle& t = mesh_.triangles[i];
    centroids[i] = (mesh_.vertices[t[0]] + mesh_.vertices[t[1]] + mesh_.vertices[t[2]]) / 3.0;
  }
  if (n > 0) {
    nodes_.reserve(2 * n / kLeafSize + 1);
    build(0, n, centroids);
  }
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end,
                         std::vector<Eigen::Vector3d>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  Eigen::Vector3d clo = lo;
  Eigen::Vector3d chi = hi;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Triangle& t = mesh_.triangles[order_[i]];
    for (std::uint32_t v : t) {
      lo = lo.cwiseMin(mesh_.vertices[v]);
      hi = hi.cwiseMax(mesh_.vertices[v]);
    }
    clo = clo.cwiseMin(centroids[order_[i]]);
    chi = chi.cwiseMax(centroids[order_[i]]);
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;

  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  int axis = 0;
  (chi - clo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids[a][axis] != centroids[b][axis]) {
                       return centroids[a][axis] < centroids[b][axis];
                     }
                     return a < b;
                   });
  build(begin, mid, centroids);  // left child sits at index + 1
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

std::optional<RayHit> Bvh::intersect(const Point3& origin, const Vector3& dir) const {
  if (nodes_.empty()) return std::nullopt;
  const Vector3 inv_dir = dir.cwiseInverse();
  double best_t = std::numeric_limits<double>::infinity();
  std::uint32_t best_tri = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!slab_hit(node.lo, node.hi, origin, inv_dir, best_t)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t tri = order_[i];
        const Triangle& t = mesh_.triangles[tri];
        const Point3& a = mesh_.vertices[t[0]];
        auto hit = moller_trumbore(origin, dir, a, mesh_.vertices[t[1]] - a,
                                   mesh_.vertices[t[2]] - a, 1e-9);
        if (hit && (*hit < best_t || (*hit == best_t && tri < best_tri))) {
          best_t = *hit;
          best_tri = tri;
        }
      }
      continue;
    }
    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.first;
    // Visit the nearer child first.
    const Node& l = nodes_[left];
    const Node& r = nodes_[right];
    const double dl = (0.5 * (l.lo + l.hi) - origin).dot(dir);
    const double dr = (0.5 * (r.lo + r.hi) - origin).dot(dir);
    if (dl <= dr) {
      stack[top++] = right;
      stack[top++] = left;
    } else {
      stack[top++] = left;
      stack[top++] = right;
    }
  }
  if (best_tri == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return RayHit{origin + best_t * dir, best_t, best_tri};
}

namespace {

Vector3 checked_direction(const Vector3& direction) {
  const double n = direction.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorKind::Validation, "raycast direction must be non-zero");
  }
  return direction / n;
}

}  // namespace

std::optional<Point3> raycast(const Bvh& bvh, const Point3& origin, const Vector3& direction) {
  auto hit = bvh.intersect(origin, checked_direction(direction));
  if (!hit) return std::nullopt;
  return hit->point;
}

std::optional<Point3> raycast(const TriangleMesh& mesh, const Point3& origin,
                              const Vector3& direction) {
  return raycast(Bvh(mesh), origin, direction);
}

}  // namespace jpil
