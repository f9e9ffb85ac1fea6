#include "jpil/spherical.hpp"
#include "jpil/error.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace jpil {

SphericalImage SphericalImage::to_gray() const {
  if (channels == 1) return *this;
  SphericalImage g = blank(width, height);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    const std::uint8_t* p = &pixels[i * static_cast<std::size_t>(channels)];
    g.pixels[i] = static_cast<std::uint8_t>(std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
  }
  return g;
}

Vector3 pixel_to_ray_camera(double x, double y, int width, int height) {
  constexpr double pi = std::numbers::pi;
  const double lon = 2.0 * pi * (x + 0.5) / width - pi;
  const double lat = 0.5 * pi - pi * (y + 0.5) / height;
  const double c = std::cos(lat);
  return {c * std::sin(lon), c * std::cos(lon), std::sin(lat)};
}

Vector3 pixel_to_ray(int x, int y, int width, int height, const OrientationENU& orientation) {
  if (x < 0 || y < 0 || x >= width || y >= height) {
    throw Error(ErrorKind::Validation, "pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                                           ") outside " + std::to_string(width) + "x" +
                                           std::to_string(height));
  }
  return orientation.rotation() * pixel_to_ray_camera(x, y, width, height);
}

Eigen::Vector2d ray_to_pixel(const Vector3& d, int width, int height) {
  constexpr double pi = std::numbers::pi;
  const double lon = std::atan2(d.x(), d.y());
  const double lat = std::asin(std::clamp(d.z() / d.norm(), -1.0, 1.0));
  return {(lon + pi) * width / (2.0 * pi) - 0.5, (0.5 * pi - lat) * height / pi - 0.5};
}

std::uint8_t shade(const Vector3& normal, const Vector3& ray, double ambient) {
  const double lambert = std::abs(normal.dot(ray));
  const double v = 255.0 * (ambient + (1.0 - ambient) * lambert);
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

SphericalRender render_spherical(const Bvh& scene, const Point3& position,
                                 const OrientationENU& orientation, const RenderParams& params) {
  if (params.width <= 0 || params.height <= 0) {
    throw Error(ErrorKind::Validation, "render size must be positive");
  }
  SphericalRender out;
  out.image = SphericalImage::blank(params.width, params.height);
  const Point3 nan = Point3::Constant(std::numeric_limits<double>::quiet_NaN());
  out.backtrack.assign(out.image.pixels.size(), nan);

  const Matrix3 rot = orientation.rotation();
  const TriangleMesh& mesh = scene.mesh();
  const int h = params.height;
#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < params.width; ++x) {
      const Vector3 dir = rot * pixel_to_ray_camera(x, y, params.width, params.height);
      const auto hit = scene.intersect(position, dir);
      if (!hit) continue;
      const Triangle& t = mesh.triangles[hit->triangle];
      const Vector3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                            .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                            .normalized();
      const std::size_t i = out.index(x, y);
      out.backtrack[i] = hit->point;
      out.image.pixels[i] = shade(n, dir, params.ambient);
    }
  }
  return out;
}

SphericalRender render_spherical(const TriangleMesh& mesh, const Point3& position,
                                 const OrientationENU& orientation, const RenderParams& params) {
  return render_spherical(Bvh(mesh), position, orientation, params);
}

std::vector<double> sigma_map(const SphericalRender& render, int n) {
  if (n < 1) throw Error(ErrorKind::Validation, "sigma kernel half-width must be >= 1");
  const int w = render.width();
  const int h = render.height();
  std::vector<double> sigma(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!render.valid(x, y)) continue;
      Point3 sum = Point3::Zero();
      int count = 0;
      for (int dy = -n; dy <= n; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -n; dx <= n; ++dx) {
          const int xx = ((x + dx) % w + w) % w;
          if (!render.valid(xx, yy)) continue;
          sum += render.backtrack[render.index(xx, yy)];
          ++count;
        }
      }
      if (count < 4) continue;
      const Point3 centroid = sum / count;
      double sq = 0.0;
      for (int dy = -n; dy <= n; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -n; dx <= n; ++dx) {
          const int xx = ((x + dx) % w + w) % w;
          if (!render.valid(xx, yy)) continue;
          sq += (render.backtrack[render.index(xx, yy)] - centroid).squaredNorm();
        }
      }
      sigma[render.index(x, y)] = std::sqrt(sq / count);
    }
  }
  return sigma;
}

std::string backtrack_bytes(const SphericalRender& render) {
  std::string out;
  out.resize(render.backtrack.size() * 3 * sizeof(float));
  char* dst = out.data();
  for (const Point3& p : render.backtrack) {
    for (int k = 0; k < 3; ++k) {
      const float v = static_cast<float>(p[k]);
      std::memcpy(dst, &v, sizeof(float));
      dst += sizeof(float);
    }
  }
  return out;
}

}  // namespace jpil
