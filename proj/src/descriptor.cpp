#include "jpil/descriptor.hpp"
#include "jpil/error.hpp"
#include "jpil/spatial_grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <tuple>

namespace jpil {

namespace {

struct Bin {
  std::size_t count = 0;
  double distance_sum = 0.0;
};

// Coordinate pairs for the xy, xz and yz planes.
constexpr int kPlaneAxes[3][2] = {{0, 1}, {0, 2}, {1, 2}};

}  // namespace

TbscDescriptor compute_tbsc_at(std::span<const Point3> points, const Point3& center,
                               const Matrix3& lrf, double radius, const TbscParams& params) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Validation, "descriptor radius must be positive");
  if (params.n_r < 1 || params.n_a < 1) throw Error(ErrorKind::Validation, "empty bin layout");

  TbscDescriptor d;
  d.bits = params.length();
  d.words.assign((d.bits + 63) / 64, 0);
  d.radius = radius;

  const double r2 = radius * radius;
  std::vector<Vector3> offsets;
  for (const Point3& p : points) {
    const Vector3 off = p - center;
    if (off.squaredNorm() <= r2) offsets.push_back(lrf.transpose() * off);
  }
  if (offsets.empty()) {
    d.low_support = true;
    return d;
  }
  // Canonical order makes the floating-point sums independent of input order.
  std::sort(offsets.begin(), offsets.end(), [](const Vector3& a, const Vector3& b) {
    return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
  });

  const std::size_t nbins = params.bins_per_plane();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Bin> bins(nbins);
  for (int plane = 0; plane < 3; ++plane) {
    std::fill(bins.begin(), bins.end(), Bin{});
    const int ax = kPlaneAxes[plane][0];
    const int ay = kPlaneAxes[plane][1];
    for (const Vector3& o : offsets) {
      const double a = o[ax];
      const double b = o[ay];
      const double rho2 = a * a + b * b;
      const int ring = std::min(params.n_r - 1, static_cast<int>(params.n_r * rho2 / r2));
      int sector = static_cast<int>((std::atan2(b, a) + std::numbers::pi) / two_pi * params.n_a);
      sector = std::clamp(sector, 0, params.n_a - 1);
      Bin& bin = bins[static_cast<std::size_t>(ring * params.n_a + sector)];
      bin.count += 1;
      bin.distance_sum += std::sqrt(rho2);
    }

    const std::size_t base = static_cast<std::size_t>(plane) * 2 * nbins;
    // Density bits: fraction above the per-plane mean, i.e. count * nbins > total.
    for (std::size_t k = 0; k < nbins; ++k) {
      if (bins[k].count * nbins > offsets.size()) d.set(base + k);
    }
    std::vector<double> mean_distance(nbins, 0.0);
    double plane_mean = 0.0;
    for (std::size_t k = 0; k < nbins; ++k) {
      if (bins[k].count > 0) mean_distance[k] = bins[k].distance_sum / static_cast<double>(bins[k].count);
      plane_mean += mean_distance[k];
    }
    plane_mean /= static_cast<double>(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
      if (mean_distance[k] > plane_mean) d.set(base + nbins + k);
    }
  }
  return d;
}

TbscDescriptor compute_tbsc(const PointCloud& cloud, const OrientedKeypoint& kp, double radius,
                            const TbscParams& params) {
  return compute_tbsc_at(cloud.points, kp.position, kp.lrf, radius, params);
}

std::vector<TbscDescriptor> compute_tbsc_batch(const PointCloud& cloud,
                                               std::span<const OrientedKeypoint> keypoints,
                                               double radius, const TbscParams& params) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Validation, "descriptor radius must be positive");
  std::vector<TbscDescriptor> out(keypoints.size());
  if (keypoints.empty()) return out;
  const SpatialGrid grid(cloud.points, radius);
  const auto n = static_cast<std::int64_t>(keypoints.size());
#pragma omp parallel
  {
    std::vector<std::uint32_t> idx;
    std::vector<Point3> hood;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      const OrientedKeypoint& kp = keypoints[static_cast<std::size_t>(i)];
      grid.radius_search(kp.position, radius, idx);
      hood.clear();
      for (std::uint32_t j : idx) hood.push_back(cloud.points[j]);
      out[static_cast<std::size_t>(i)] = compute_tbsc_at(hood, kp.position, kp.lrf, radius, params);
    }
  }
  return out;
}

int hamming(const TbscDescriptor& a, const TbscDescriptor& b) {
  if (a.bits != b.bits || a.words.size() != b.words.size()) {
    throw Error(ErrorKind::Validation, "descriptor length mismatch: " + std::to_string(a.bits) +
                                           " vs " + std::to_string(b.bits));
  }
  int total = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) total += std::popcount(a.words[i] ^ b.words[i]);
  return total;
}

std::string TbscDescriptor::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  const std::size_t nibbles = (bits + 3) / 4;
  s.reserve(nibbles);
  // Most significant nibble first, so bit 0 is the last character's low bit.
  for (std::size_t n = nibbles; n-- > 0;) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = 4 * n + b;
      if (i < bits && bit(i)) v |= 1u << b;
    }
    s.push_back(kDigits[v]);
  }
  return s;
}

TbscDescriptor TbscDescriptor::from_hex(std::string_view hex, std::size_t bits) {
  TbscDescriptor d;
  d.bits = bits;
  d.words.assign((bits + 63) / 64, 0);
  if (hex.size() != (bits + 3) / 4) throw Error(ErrorKind::Parse, "descriptor hex has wrong length");
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const char c = hex[hex.size() - 1 - k];
    unsigned v = 0;
    if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
    else throw Error(ErrorKind::Parse, "invalid hex digit in descriptor");
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = 4 * k + b;
      if ((v >> b) & 1u) {
        if (i >= bits) throw Error(ErrorKind::Parse, "descriptor hex sets bits past its length");
        d.set(i);
      }
    }
  }
  return d;
}

}  // namespace jpil
