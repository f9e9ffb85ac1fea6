#pragma once

#include "jpil/keypoints.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jpil {

// Polar bin layout used on each of the three LRF coordinate planes.
struct TbscParams {
  int n_r = 4;  // equal-area rings
  int n_a = 8;  // azimuthal sectors

  std::size_t bins_per_plane() const { return static_cast<std::size_t>(n_r * n_a); }
  // 3 planes x 2 features x bins; also the largest possible Hamming distance.
  std::size_t length() const { return 6 * bins_per_plane(); }
};

// Translation-specific binary shape context: a bit string laid out as
// [plane xy, xz, yz][feature density, distance][ring-major bins].
struct TbscDescriptor {
  std::vector<std::uint64_t> words;
  std::size_t bits = 0;
  double radius = 0.0;
  bool low_support = false;  // no neighbors inside the support sphere

  bool bit(std::size_t i) const { return (words[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }

  std::string hex() const;
  static TbscDescriptor from_hex(std::string_view hex, std::size_t bits);
  bool operator==(const TbscDescriptor& o) const { return bits == o.bits && words == o.words; }
};

// Descriptor from the neighbor offsets around `center` expressed in `lrf`.
// Points farther than `radius` are ignored.
TbscDescriptor compute_tbsc_at(std::span<const Point3> points, const Point3& center,
                               const Matrix3& lrf, double radius, const TbscParams& params = {});

TbscDescriptor compute_tbsc(const PointCloud& cloud, const OrientedKeypoint& kp, double radius,
                            const TbscParams& params = {});

// All keypoints of one cloud, grid-accelerated and parallel.
std::vector<TbscDescriptor> compute_tbsc_batch(const PointCloud& cloud,
                                               std::span<const OrientedKeypoint> keypoints,
                                               double radius, const TbscParams& params = {});

// Number of differing bits. Throws Error(Validation) on length mismatch.
int hamming(const TbscDescriptor& a, const TbscDescriptor& b);

}  // namespace jpil
