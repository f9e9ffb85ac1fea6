#pragma once

#include "jpil/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace jpil {

// Uniform hash-free grid over a point set for exact fixed-radius queries.
// Cells are stored sorted by key so a query is a handful of binary searches.
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Point3> points, double cell_size);

  // Indices of all points with |p - center| <= radius, ascending.
  void radius_search(const Point3& center, double radius, std::vector<std::uint32_t>& out) const;

  std::span<const Point3> points() const { return points_; }

 private:
  std::uint64_t key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;
  std::int64_t cell_of(double v) const;

  std::span<const Point3> points_;
  double cell_;
  std::vector<std::uint64_t> keys_;     // sorted, one per point
  std::vector<std::uint32_t> indices_;  // point index for each sorted key
};

}  // namespace jpil
