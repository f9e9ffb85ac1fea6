#include "helpers.hpp"
#include "jpil/error.hpp"
#include "jpil/mesh.hpp"
#include "jpil/synthbench.hpp"

#include <doctest.h>

#include <numbers>
#include <numeric>

using namespace jpil;

namespace {

struct World {
  Scene scene = generate_scene(SceneSpec{});
  JpilConfig cfg;
  std::shared_ptr<const ReferenceModel> ref = ReferenceModel::prepare(scene.mesh, cfg);
};

const World& world() {
  static const World w;
  return w;
}

}  // namespace

TEST_CASE("scene: seeded, closed-form area, validated") {
  const Scene a = generate_scene(SceneSpec{});
  const Scene b = generate_scene(SceneSpec{});
  CHECK(a.mesh.vertices == b.mesh.vertices);
  CHECK(a.mesh.triangles == b.mesh.triangles);
  SceneSpec other;
  other.seed = 2;
  CHECK(generate_scene(other).mesh.vertices != a.mesh.vertices);

  const double boxes = std::accumulate(a.boxes.begin(), a.boxes.end(), 0.0,
                                       [](double s, const SceneBox& box) { return s + box.area(); });
  CHECK(surface_area(a.mesh) == doctest::Approx(boxes).epsilon(1e-9));

  SceneSpec bad;
  bad.girders = 0;
  CHECK_THROWS_AS(generate_scene(bad), Error);
  bad = {};
  bad.spacing = 1.0;
  CHECK_THROWS_AS(generate_scene(bad), Error);
}

TEST_CASE("scene: the shared zone repeats from girder to girder") {
  const Scene& s = world().scene;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int differing = 0, filled = 0;
  for (int i = 0; i < 4000; ++i) {
    const double side = u(rng) < 0.5 ? -1.0 : 1.0;
    const double off = side * (0.5 * s.spec.girder_width + 0.6 * u(rng));
    const Point3 p(s.girder_x[0] + off, s.shared_y_min() + 0.5 + (s.spec.shared_zone - 1.0) * u(rng),
                   s.girder_bottom() + (s.spec.girder_depth - 0.01) * u(rng));
    const bool here = s.occupied(p);
    filled += here;
    for (std::size_t g = 1; g < s.girder_x.size(); ++g) {
      differing += here != s.occupied(p + Vector3(s.girder_x[g] - s.girder_x[0], 0, 0));
    }
  }
  CHECK(filled > 20);
  CHECK(differing == 0);
}

TEST_CASE("session: crop area, frame, empty crop") {
  const World& w = world();
  PlacementOptions place;
  place.seed = 3;
  const SessionSpec spec = place_session(w.scene, place);
  double area = 0;
  const TriangleMesh crop = session_mesh(w.scene, spec, &area);
  CHECK(area > 3.0);
  CHECK(area < 8.0);
  // Session vertices map back inside the crop box under A.
  for (const Point3& v : crop.vertices) {
    const Point3 r = spec.a_true.apply(v);
    CHECK((r.array() >= spec.crop.min.array() - 1e-9).all());
    CHECK((r.array() <= spec.crop.max.array() + 1e-9).all());
  }
  CHECK_FALSE(w.scene.occupied(spec.camera));

  SessionSpec empty = spec;
  empty.crop = {{100, 100, 100}, {101, 101, 101}};
  CHECK_THROWS_AS(session_mesh(w.scene, empty), Error);

  PlacementOptions bad = place;
  bad.girder = 7;
  CHECK_THROWS_AS(place_session(w.scene, bad), Error);
}

TEST_CASE("walk: deterministic, crop grows") {
  const World& w = world();
  WalkOptions opt;
  opt.trials = 1;
  opt.steps = 2;
  opt.seed = 5;
  const WalkReport a = run_walk_cdf(w.scene, *w.ref, w.cfg, opt);
  const WalkReport b = run_walk_cdf(w.scene, *w.ref, w.cfg, opt);
  REQUIRE(a.steps.size() == 2);
  CHECK(a.steps[1].area > a.steps[0].area);
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].jpil_error == b.steps[i].jpil_error);
    CHECK(a.steps[i].pc_error == b.steps[i].pc_error);
    CHECK(a.steps[i].candidates == b.steps[i].candidates);
  }
  CHECK(a.trials.size() == 1);
}

TEST_CASE("walk report: medians over infinite minima, flakes") {
  WalkReport r;
  const double inf = std::numeric_limits<double>::infinity();
  r.trials = {{1, 3.0, inf, 0}, {2, inf, inf, 1}, {3, 5.0, 9.0, 0}};
  CHECK(r.jpil_median() == 5.0);
  CHECK(r.pc_median() == inf);
  CHECK(r.jpil_successes_within(4.0) == 1);
  CHECK(r.flakes() == 1);
}

TEST_CASE("sweep: deterministic and one point per grid value") {
  const World& w = world();
  SweepOptions opt;
  opt.parameter = SweepParameter::EpsQ;
  opt.grid = {4.0, 30.0};
  opt.seeds = 2;
  const auto a = run_sweep(w.scene, *w.ref, w.cfg, opt);
  const auto b = run_sweep(w.scene, *w.ref, w.cfg, opt);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == opt.grid[i]);
    CHECK(a[i].runs == 2);
    CHECK(a[i].errors == b[i].errors);
  }
  CHECK(parse_sweep_parameter(to_string(SweepParameter::EpsSigma)) == SweepParameter::EpsSigma);
  CHECK_THROWS_AS(parse_sweep_parameter("eps-z"), Error);
}

TEST_CASE("scene: area oracle at 10 m spacing") {
  SceneSpec spec;
  spec.spacing = 10.0;
  const Scene s = generate_scene(spec);
  double boxes = 0;
  for (const SceneBox& b : s.boxes) boxes += b.area();
  CHECK(std::abs(surface_area(s.mesh) - boxes) < 1e-9 * boxes);
}

TEST_CASE("symmetric crop of about 5 m^2 yields several candidates") {
  const World& w = world();
  PlacementOptions place;
  place.seed = 12;
  const SessionSample sample = simulate_session(w.scene, place_session(w.scene, place));
  CHECK(sample.crop_area == doctest::Approx(5.0).epsilon(0.25));
  CHECK(session_candidates(*w.ref, sample.request.session_mesh, w.cfg).size() >= 2);
}

TEST_CASE("single girder, clean crop: one candidate") {
  SceneSpec spec;
  spec.girders = 1;
  const Scene scene = generate_scene(spec);
  JpilConfig cfg;
  const auto ref = ReferenceModel::prepare(scene.mesh, cfg);
  PlacementOptions place;
  place.seed = 6;
  place.girder = 0;
  const SessionSample sample = simulate_session(scene, place_session(scene, place));
  CHECK(session_candidates(*ref, sample.request.session_mesh, cfg).size() == 1);
}

TEST_CASE("noiseless unique crop recovers A_true") {
  const World& w = world();
  const Scene& s = w.scene;
  SessionSpec spec;
  const double x = s.girder_x[1] + 0.5 * s.spec.girder_width;
  spec.crop = {{x - 0.1, 2.0, s.girder_bottom() + 0.2}, {x + 0.35, 6.0, s.spec.deck_height - 0.2}};
  spec.a_true = RigidTransform::from_translation({20.3, -4.6, 0.2});
  spec.camera = {x + 2.0, 4.0, 2.8};
  spec.orientation = {0.0, 0.0, -90.0};
  const SessionSample sample = simulate_session(s, spec);
  const LocalizationResult r = jpil::jpil(*w.ref, sample.request, w.cfg);
  MESSAGE("error " << position_error(r, sample) << " m, gate " << std::string(to_string(r.gate)));
  CHECK(position_error(r, sample) < 1e-3);
}

TEST_CASE("device frame off by 5 degrees of yaw") {
  const World& w = world();
  PlacementOptions place;
  place.seed = 13;
  SessionSpec spec = place_session(w.scene, place);
  spec.frame_error = {0.0, 0.0, 5.0};
  const SessionSample sample = simulate_session(w.scene, spec);
  // The reported orientation carries the error and the map is rotated with it.
  CHECK(test::angle_gap(sample.request.state.orientation.yaw, spec.orientation.yaw) == doctest::Approx(5.0));
  const Eigen::AngleAxisd turn(sample.a_true.rotation);
  CHECK(turn.angle() * 180.0 / std::numbers::pi == doctest::Approx(5.0));
  const LocalizationResult r = jpil::jpil(*w.ref, sample.request, w.cfg);
  MESSAGE("error " << position_error(r, sample) << " m");
  CHECK(position_error(r, sample) < 0.6);
}

TEST_CASE("eps_sigma sweep: inliers do not drop as the threshold grows") {
  const World& w = world();
  SweepOptions opt;
  opt.parameter = SweepParameter::EpsSigma;
  opt.grid = {0.05, 0.25, 1.0, 2.0};
  opt.seeds = 3;
  const auto pts = run_sweep(w.scene, *w.ref, w.cfg, opt);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    MESSAGE("eps_sigma " << pts[i].value << " inliers " << pts[i].mean_inliers);
    CHECK(pts[i].mean_inliers >= pts[i - 1].mean_inliers);
  }
}
