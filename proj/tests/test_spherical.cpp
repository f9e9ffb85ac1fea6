#include "helpers.hpp"
#include "jpil/error.hpp"
#include "jpil/mesh_io.hpp"
#include "jpil/reference.hpp"
#include "jpil/synthbench.hpp"

#include <doctest.h>

#include <numbers>

using namespace jpil;

namespace {

// Wall facing the origin at North distance d.
TriangleMesh wall(double d, double half = 5.0) {
  TriangleMesh m;
  m.add_triangle({-half, d, -half}, {half, d, -half}, {half, d, half});
  m.add_triangle({-half, d, -half}, {half, d, half}, {-half, d, half});
  return m;
}

const Scene& scene() {
  static const Scene s = generate_scene(SceneSpec{});
  return s;
}

}  // namespace

TEST_CASE("pixel rays follow the equirectangular convention") {
  const int w = 1280, h = 640;
  CHECK((pixel_to_ray_camera(w / 2 - 0.5, h / 2 - 0.5, w, h) - Vector3::UnitY()).norm() < 1e-9);
  const double half_pixel = std::numbers::pi / h;
  CHECK(std::acos(pixel_to_ray(w / 2, h / 2, w, h).dot(Vector3::UnitY())) < 1.5 * half_pixel);
  CHECK(std::acos(pixel_to_ray(w / 2, 0, w, h).dot(Vector3::UnitZ())) <= half_pixel + 1e-12);
  // Quarter turn to the right of the centre looks East.
  CHECK((pixel_to_ray_camera(3 * w / 4 - 0.5, h / 2 - 0.5, w, h) - Vector3::UnitX()).norm() < 1e-9);
  CHECK_THROWS_AS(pixel_to_ray(w, 0, w, h), Error);
  CHECK_THROWS_AS(pixel_to_ray(0, -1, w, h), Error);
}

TEST_CASE("every pixel ray is unit length and round trips") {
  const int w = 256, h = 128;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vector3 r = pixel_to_ray(x, y, w, h);
      CHECK(std::abs(r.norm() - 1.0) < 1e-12);
      const Eigen::Vector2d px = ray_to_pixel(r, w, h);
      CHECK(std::abs(px.x() - x) < 1e-6);
      CHECK(std::abs(px.y() - y) < 1e-6);
    }
  }
}

TEST_CASE("oriented rays rotate with the camera") {
  const OrientationENU q{3.0, -7.0, 40.0};
  const Vector3 r = pixel_to_ray(100, 50, 256, 128, q);
  CHECK((r - q.rotation() * pixel_to_ray_camera(100, 50, 256, 128)).norm() < 1e-15);
}

TEST_CASE("wall two meters ahead") {
  const SphericalRender r = render_spherical(wall(2.0), Point3::Zero(), {}, {256, 128});
  int valid = 0;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      if (!r.valid(x, y)) continue;
      ++valid;
      const Point3& p = r.backtrack[r.index(x, y)];
      CHECK(std::abs(p.y() - 2.0) < 1e-6);
      const Vector3 ray = pixel_to_ray(x, y, 256, 128);
      CHECK((p - p.norm() * ray).norm() < 1e-9);
    }
  }
  CHECK(valid > 1000);
  CHECK(r.valid(128, 64));
  CHECK_FALSE(r.valid(0, 64));  // looking South
}

TEST_CASE("empty mesh renders nothing") {
  const SphericalRender r = render_spherical(TriangleMesh{}, Point3::Zero(), {}, {64, 32});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) CHECK_FALSE(r.valid(x, y));
}

TEST_CASE("backtracked points project back into their pixel and renders are deterministic") {
  const Point3 cam(scene().girder_x[1] + 2.5, 14.0, 2.0);
  const OrientationENU q{2.0, -3.0, 25.0};
  const SphericalRender r = render_spherical(scene().mesh, cam, q, {320, 160});
  const Matrix3 rt = q.rotation().transpose();
  int valid = 0;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      if (!r.valid(x, y)) continue;
      ++valid;
      const Eigen::Vector2d px = ray_to_pixel(rt * (r.backtrack[r.index(x, y)] - cam), 320, 160);
      double dx = std::abs(px.x() - x);
      dx = std::min(dx, 320 - dx);
      CHECK(dx < 0.5);
      CHECK(std::abs(px.y() - y) < 0.5);
    }
  }
  CHECK(valid > 0.4 * 320 * 160);
  const SphericalRender again = render_spherical(scene().mesh, cam, q, {320, 160});
  CHECK(again.image.pixels == r.image.pixels);
  CHECK(backtrack_bytes(again) == backtrack_bytes(r));
  CHECK(backtrack_bytes(r).size() == 320u * 160u * 12u);
}

TEST_CASE("BVH render equals the brute-force renderer") {
  const Point3 cam(scene().girder_x[0] + 2.0, 20.0, 2.5);
  const OrientationENU q{0.0, 5.0, -60.0};
  const SphericalRender a = render_spherical(scene().mesh, cam, q, {128, 64});
  const SphericalRender b = serial::render_spherical(scene().mesh, cam, q, {128, 64});
  CHECK(a.image.pixels == b.image.pixels);
  CHECK(backtrack_bytes(a) == backtrack_bytes(b));
}

TEST_CASE("a quarter turn in yaw shifts the panorama by a quarter width") {
  const Point3 cam(scene().girder_x[1] + 3.0, 15.0, 2.0);
  const int w = 400, h = 200;
  const SphericalRender a = render_spherical(scene().mesh, cam, {0, 0, 0}, {w, h});
  const SphericalRender b = render_spherical(scene().mesh, cam, {0, 0, 90}, {w, h});
  int same = 0, total = 0;
  double worst = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xs = (x + w / 4) % w;
      ++total;
      if (a.image.at(xs, y) == b.image.at(x, y)) ++same;
      if (a.valid(xs, y) && b.valid(x, y)) {
        worst = std::max(worst, (a.backtrack[a.index(xs, y)] - b.backtrack[b.index(x, y)]).norm());
      }
    }
  }
  // Rays differ only by rounding in the rotation, so a handful of pixels on
  // triangle edges may land on a neighbour.
  CHECK(same >= total - total / 1000);
  CHECK(same > 0);
  MESSAGE("identical pixels " << same << " / " << total << ", worst backtrack gap " << worst);
}

TEST_CASE("sigma of a planar wall matches the window spread") {
  const double d = 2.0;
  const int w = 1280, h = 640;
  const SphericalRender r = render_spherical(wall(d), Point3::Zero(), {}, {w, h});
  const auto sigma = sigma_map(r, 2);
  // 5x5 samples spaced s = d * 2pi / w in both directions: rms spread 2 s.
  const double expected = 2.0 * d * 2.0 * std::numbers::pi / w;
  const double centre = sigma[r.index(w / 2, h / 2)];
  CHECK(centre == doctest::Approx(expected).epsilon(0.01));
  CHECK(sigma[r.index(w / 2 + 20, h / 2 + 10)] < 2.0 * expected);
}

TEST_CASE("sigma spikes on a depth discontinuity") {
  TriangleMesh m = wall(6.0, 20.0);
  // Near panel covering the left half of the view.
  m.add_triangle({-3, 1.5, -3}, {0, 1.5, -3}, {0, 1.5, 3});
  m.add_triangle({-3, 1.5, -3}, {0, 1.5, 3}, {-3, 1.5, 3});
  const int w = 640, h = 320;
  const SphericalRender r = render_spherical(m, Point3::Zero(), {}, {w, h});
  const auto sigma = sigma_map(r, 2);
  const int y = h / 2;
  int edge = -1;
  for (int x = w / 2 - 10; x < w / 2 + 10; ++x) {
    if (r.backtrack[r.index(x, y)].y() < 2.0 && r.backtrack[r.index(x + 1, y)].y() > 2.0) edge = x;
  }
  REQUIRE(edge > 0);
  const double interior = sigma[r.index(edge + 30, y)];
  CHECK(sigma[r.index(edge, y)] > 5.0 * interior);
  CHECK(sigma[r.index(edge + 1, y)] > 5.0 * interior);
}

TEST_CASE("sigma needs support and agrees with the serial map") {
  SphericalRender r;
  r.image = SphericalImage::blank(16, 8);
  r.backtrack.assign(16 * 8, Point3::Constant(std::numeric_limits<double>::quiet_NaN()));
  r.backtrack[r.index(5, 4)] = Point3(1, 2, 3);
  const auto s = sigma_map(r, 2);
  CHECK(std::isinf(s[r.index(5, 4)]));
  CHECK(std::isinf(s[r.index(0, 0)]));
  CHECK_THROWS_AS(sigma_map(r, 0), Error);

  const SphericalRender big =
      render_spherical(scene().mesh, {scene().girder_x[2] - 2.0, 10.0, 2.0}, {0, 0, 120}, {256, 128});
  CHECK(sigma_map(big, 2) == serial::sigma_map(big, 2));
  CHECK(sigma_map(big, 3) == serial::sigma_map(big, 3));
}

TEST_CASE("PNG round trip and aspect rule") {
  SphericalImage img = SphericalImage::blank(64, 32);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 37);
  const std::string png = encode_png(img);
  const SphericalImage back = decode_image(as_bytes(png));
  CHECK(back.width == 64);
  CHECK(back.height == 32);
  CHECK(back.pixels == img.pixels);
  CHECK_THROWS_AS(decode_image(as_bytes(std::string("not a png"))), Error);
  CHECK(img.has_valid_aspect());
  CHECK_FALSE(SphericalImage::blank(1280, 720).has_valid_aspect());
}
