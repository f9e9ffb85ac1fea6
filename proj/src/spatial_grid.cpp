#include "jpil/spatial_grid.hpp"
#include "jpil/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jpil {

namespace {
constexpr std::int64_t kBias = std::int64_t{1} << 20;
constexpr std::uint64_t kMask = (std::uint64_t{1} << 21) - 1;
}  // namespace

SpatialGrid::SpatialGrid(std::span<const Point3> points, double cell_size)
    : points_(points), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw Error(ErrorKind::Validation, "grid cell size must be positive");
  std::vector<std::uint64_t> point_keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point3& p = points[i];
    point_keys[i] = key(cell_of(p.x()), cell_of(p.y()), cell_of(p.z()));
  }
  indices_.resize(points.size());
  std::iota(indices_.begin(), indices_.end(), 0u);
  std::sort(indices_.begin(), indices_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return point_keys[a] != point_keys[b] ? point_keys[a] < point_keys[b] : a < b;
  });
  keys_.resize(points.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) keys_[i] = point_keys[indices_[i]];
}

std::int64_t SpatialGrid::cell_of(double v) const {
  return static_cast<std::int64_t>(std::floor(v / cell_));
}

std::uint64_t SpatialGrid::key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
  return ((static_cast<std::uint64_t>(ix + kBias) & kMask) << 42) |
         ((static_cast<std::uint64_t>(iy + kBias) & kMask) << 21) |
         (static_cast<std::uint64_t>(iz + kBias) & kMask);
}

void SpatialGrid::radius_search(const Point3& center, double radius,
                                std::vector<std::uint32_t>& out) const {
  out.clear();
  const double r2 = radius * radius;
  const std::int64_t x0 = cell_of(center.x() - radius), x1 = cell_of(center.x() + radius);
  const std::int64_t y0 = cell_of(center.y() - radius), y1 = cell_of(center.y() + radius);
  const std::int64_t z0 = cell_of(center.z() - radius), z1 = cell_of(center.z() + radius);
  for (std::int64_t ix = x0; ix <= x1; ++ix) {
    for (std::int64_t iy = y0; iy <= y1; ++iy) {
      // z is the low field, so a z-run of cells is one contiguous key range.
      const auto lo = std::lower_bound(keys_.begin(), keys_.end(), key(ix, iy, z0));
      const auto hi = std::upper_bound(lo, keys_.end(), key(ix, iy, z1));
      for (auto it = lo; it != hi; ++it) {
        const std::uint32_t idx = indices_[static_cast<std::size_t>(it - keys_.begin())];
        if ((points_[idx] - center).squaredNorm() <= r2) out.push_back(idx);
      }
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace jpil
