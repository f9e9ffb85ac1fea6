#pragma once

#include "jpil/bvh.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace jpil {

// Equirectangular image, 8-bit, row-major, width = 2 * height.
struct SphericalImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;

  static SphericalImage blank(int width, int height) {
    return {width, height, 1, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  }
  bool has_valid_aspect() const { return width > 0 && height > 0 && width == 2 * height; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  SphericalImage to_gray() const;
};

// Synthetic render with the 3D point behind every pixel.
struct SphericalRender {
  SphericalImage image;
  std::vector<Point3> backtrack;  // hit point per pixel, NaN when the ray missed
  std::vector<double> sigma;      // filled by sigma_map; +inf where unsupported

  int width() const { return image.width; }
  int height() const { return image.height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * image.width + x; }
  bool valid(int x, int y) const { return !std::isnan(backtrack[index(x, y)].x()); }
};

struct RenderParams {
  int width = 1280;
  int height = 640;
  double ambient = 0.15;  // shading floor for surfaces seen edge-on
};

// Camera-frame unit ray through a (possibly fractional) pixel position.
// Longitude 0 is straight ahead (North for the identity orientation) and grows
// towards the right (East); latitude grows towards Up.
Vector3 pixel_to_ray_camera(double x, double y, int width, int height);

// World ray for an integer pixel. Throws Error(Validation) out of range.
Vector3 pixel_to_ray(int x, int y, int width, int height, const OrientationENU& orientation = {});

// Inverse of pixel_to_ray_camera for any non-zero camera-frame direction.
Eigen::Vector2d ray_to_pixel(const Vector3& camera_dir, int width, int height);

// One nearest-hit ray per pixel; Lambertian shading from a light at the
// camera. Parallel over rows and independent of scheduling.
SphericalRender render_spherical(const Bvh& scene, const Point3& position,
                                 const OrientationENU& orientation, const RenderParams& params = {});
SphericalRender render_spherical(const TriangleMesh& mesh, const Point3& position,
                                 const OrientationENU& orientation, const RenderParams& params = {});

// Shading shared with the serial reference renderer.
std::uint8_t shade(const Vector3& normal, const Vector3& ray, double ambient);

// Spread of the backtracked points in the (2n+1)^2 window around each pixel:
// root-mean-square distance to the window centroid. Windows wrap around in
// longitude and are cut at the poles; fewer than 4 valid points (or an invalid
// center) give +inf.
std::vector<double> sigma_map(const SphericalRender& render, int n);

// PNG codec (8-bit gray or RGB). decode throws Error(Parse).
std::string encode_png(const SphericalImage& image);
SphericalImage decode_image(std::span<const std::byte> bytes);
void write_png(const std::filesystem::path& path, const SphericalImage& image);
SphericalImage read_image(const std::filesystem::path& path);

// Little-endian float32 x,y,z per pixel, row-major, NaN for misses.
std::string backtrack_bytes(const SphericalRender& render);

}  // namespace jpil
