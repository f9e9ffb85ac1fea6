#include "jpil/synthbench.hpp"
#include "jpil/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace jpil {

namespace {

Matrix3 yaw_rotation(double yaw) { return Eigen::AngleAxisd(yaw, Vector3::UnitZ()).toRotationMatrix(); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// A box attached to a girder web, in face-relative terms so the same draw can
// be stamped onto every girder.
struct Detail {
  double out = 0.0;  // centre distance from the web face
  double y = 0.0;
  double z = 0.0;
  Vector3 half = Vector3::Zero();
};

void draw_stiffeners(std::mt19937_64& rng, int count, double y_lo, double y_hi, double bottom,
                     double top, std::vector<Detail>& out) {
  constexpr double kThickness = 0.03;
  for (int i = 0; i < count; ++i) {
    const double y = uniform(rng, y_lo, y_hi);
    const double reach = uniform(rng, 0.1, 0.25);
    const double height = uniform(rng, 0.35, 1.0) * (top - bottom);
    const bool hanging = uniform(rng, 0.0, 1.0) < 0.5;
    const double z = hanging ? top - 0.5 * height : bottom + 0.5 * height;
    out.push_back({0.5 * reach, y, z, {0.5 * reach, 0.5 * kThickness, 0.5 * height}});
  }
}

void draw_brackets(std::mt19937_64& rng, int count, double y_lo, double y_hi, double bottom,
                   double top, std::vector<Detail>& out) {
  constexpr double kSpacing = 0.55;
  std::vector<Detail> placed;
  for (int attempt = 0; static_cast<int>(placed.size()) < count && attempt < 50 * (count + 1); ++attempt) {
    const Vector3 half(uniform(rng, 0.04, 0.1), uniform(rng, 0.06, 0.15), uniform(rng, 0.06, 0.15));
    const double y = uniform(rng, y_lo + half.y(), y_hi - half.y());
    // Clear of the girder edges so each block is an isolated curvature peak.
    const double margin = std::min(0.45 + half.z(), 0.5 * (top - bottom));
    const double z = uniform(rng, bottom + margin, top - margin);
    bool clear = true;
    for (const Detail& d : placed) {
      if (std::hypot(d.y - y, d.z - z) < kSpacing) clear = false;
    }
    if (clear) placed.push_back({half.x(), y, z, half});
  }
  out.insert(out.end(), placed.begin(), placed.end());
}

std::vector<Detail> draw_details(std::mt19937_64& rng, int stiffeners, int brackets, double y_lo,
                                 double y_hi, double bottom, double top) {
  std::vector<Detail> out;
  draw_stiffeners(rng, stiffeners, y_lo, y_hi, bottom, top, out);
  draw_brackets(rng, brackets, y_lo, y_hi, bottom, top, out);
  return out;
}

void stamp(std::vector<SceneBox>& boxes, const std::vector<Detail>& details, double x_face,
           double side) {
  for (const Detail& d : details) {
    SceneBox b;
    b.center = {x_face + side * d.out, d.y, d.z};
    b.half = d.half;
    boxes.push_back(b);
  }
}

bool inside(const SceneBox& b, const Point3& p, double margin) {
  const Vector3 local = yaw_rotation(-b.yaw) * (p - b.center);
  return (local.cwiseAbs().array() <= (b.half.array() + margin)).all();
}

}  // namespace

void SceneSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::Validation, what);
  };
  require(girders >= 1, "scene needs at least one girder");
  require(girder_width > 0 && girder_depth > 0 && length > 0 && deck_thickness > 0,
          "scene dimensions must be positive");
  require(spacing > girder_width, "girder spacing must exceed the girder width");
  require(deck_height > girder_depth, "girders must clear z = 0");
  require(shared_zone > 0 && shared_zone <= length, "shared zone must lie within the girders");
  require(deck_overhang >= 0 && clutter >= 0 && stiffeners_per_side >= 0 &&
              brackets_per_side >= 0 && unique_details >= 0,
          "counts and overhang must be non-negative");
}

bool Scene::occupied(const Point3& p, double margin) const {
  for (const SceneBox& b : boxes) {
    if (inside(b, p, margin)) return true;
  }
  return false;
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.spec = spec;
  std::mt19937_64 rng(spec.seed);

  const double top = spec.deck_height;
  const double bottom = spec.deck_height - spec.girder_depth;
  const double west = -spec.deck_overhang - 0.5 * spec.girder_width;
  const double east = (spec.girders - 1) * spec.spacing + spec.deck_overhang + 0.5 * spec.girder_width;

  SceneBox deck;
  deck.center = {0.5 * (west + east), 0.5 * spec.length, top + 0.5 * spec.deck_thickness};
  deck.half = {0.5 * (east - west), 0.5 * spec.length, 0.5 * spec.deck_thickness};
  scene.boxes.push_back(deck);

  const double y_lo = scene.shared_y_min();
  const double y_hi = scene.shared_y_max();
  const auto shared_west =
      draw_details(rng, spec.stiffeners_per_side, spec.brackets_per_side, y_lo, y_hi, bottom, top);
  const auto shared_east =
      draw_details(rng, spec.stiffeners_per_side, spec.brackets_per_side, y_lo, y_hi, bottom, top);

  for (int g = 0; g < spec.girders; ++g) {
    const double x = g * spec.spacing;
    scene.girder_x.push_back(x);
    SceneBox girder;
    girder.center = {x, 0.5 * spec.length, 0.5 * (top + bottom)};
    girder.half = {0.5 * spec.girder_width, 0.5 * spec.length, 0.5 * spec.girder_depth};
    scene.boxes.push_back(girder);

    const double xw = x - 0.5 * spec.girder_width;
    const double xe = x + 0.5 * spec.girder_width;
    stamp(scene.boxes, shared_west, xw, -1.0);
    stamp(scene.boxes, shared_east, xe, 1.0);
    // Girder-specific brackets on both ends, outside the shared zone.
    for (const double side : {-1.0, 1.0}) {
      const int n = spec.unique_details;
      const double face = side < 0 ? xw : xe;
      if (y_lo > 0.5) {
        stamp(scene.boxes, draw_details(rng, 0, n / 2, 0.2, y_lo - 0.2, bottom, top), face, side);
      }
      if (spec.length - y_hi > 0.5) {
        stamp(scene.boxes, draw_details(rng, 0, n - n / 2, y_hi + 0.2, spec.length - 0.2, bottom, top),
              face, side);
      }
    }
  }

  // Utility boxes hanging from the deck, kept clear of every girder so the
  // symmetric stretch stays symmetric.
  int placed = 0;
  for (int attempt = 0; placed < spec.clutter && attempt < 100 * (spec.clutter + 1); ++attempt) {
    SceneBox b;
    b.half = {uniform(rng, 0.1, 0.6), uniform(rng, 0.1, 0.6), uniform(rng, 0.1, 0.6)};
    b.yaw = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double reach = b.half.head<2>().norm();
    b.center = {uniform(rng, west + reach, east - reach), uniform(rng, reach, spec.length - reach),
                top - b.half.z()};
    bool clear = true;
    for (double gx : scene.girder_x) {
      if (std::abs(b.center.x() - gx) < 0.5 * spec.girder_width + spec.clutter_clearance + reach) {
        clear = false;
      }
    }
    if (!clear) continue;
    scene.boxes.push_back(b);
    ++placed;
  }

  for (const SceneBox& b : scene.boxes) append_box(scene.mesh, b.center, b.half, yaw_rotation(b.yaw));
  return scene;
}

SessionSample simulate_session(const Scene& scene, const SessionSpec& spec) {
  return simulate_session(scene, Bvh(scene.mesh), spec);
}

TriangleMesh session_mesh(const Scene& scene, const SessionSpec& spec, double* area) {
  TriangleMesh crop = clip_mesh(scene.mesh, spec.crop);
  if (crop.empty()) throw Error(ErrorKind::Validation, "session crop holds no surface");
  crop = subdivide(crop, spec.remesh_edge);
  if (area) *area = surface_area(crop);

  std::mt19937_64 rng(spec.seed);
  if (spec.noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Point3& v : crop.vertices) {
      const double dx = noise(rng);
      const double dy = noise(rng);
      const double dz = noise(rng);
      v += Vector3(dx, dy, dz);
    }
  }
  TriangleMesh out = transform_mesh(crop, spec.a_true.inverse());
  out.drop_degenerate();
  return out;
}

SphericalImage real_image(const Bvh& scene_bvh, const SessionSpec& spec) {
  SphericalRender real = render_spherical(scene_bvh, spec.camera, spec.orientation, spec.render);
  if (spec.pixel_noise > 0) {
    // Separate stream from the mesh noise so either can change alone.
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> noise(0.0, spec.pixel_noise);
    for (std::uint8_t& px : real.image.pixels) {
      px = static_cast<std::uint8_t>(std::clamp(std::lround(px + noise(rng)), 0L, 255L));
    }
  }
  return std::move(real.image);
}

SessionSample simulate_session(const Scene& scene, const Bvh& scene_bvh, const SessionSpec& spec) {
  SessionSample sample;
  // Reported orientation in the device frame is q + frame_error; the frame
  // rotation follows from R(q) = R_frame * R(reported).
  const OrientationENU& q = spec.orientation;
  const OrientationENU& f = spec.frame_error;
  const OrientationENU device = OrientationENU::normalized(q.roll + f.roll, q.pitch + f.pitch, q.yaw + f.yaw);
  SessionSpec framed = spec;
  framed.a_true = RigidTransform{q.rotation() * device.rotation().transpose(), Vector3::Zero()} * spec.a_true;

  sample.request.session_mesh = session_mesh(scene, framed, &sample.crop_area);
  sample.a_true = framed.a_true;
  sample.camera_ref = spec.camera;

  const RigidTransform to_session = framed.a_true.inverse();
  const OrientationENU& e = spec.orientation_error;
  sample.request.state.position = to_session.apply(spec.camera);
  sample.request.state.orientation =
      OrientationENU::normalized(device.roll + e.roll, device.pitch + e.pitch, device.yaw + e.yaw);
  sample.request.state.gaze = (to_session.rotation * spec.gaze).normalized();
  sample.request.image = real_image(scene_bvh, spec);
  return sample;
}

SessionSpec place_session(const Scene& scene, const PlacementOptions& options) {
  const SceneSpec& s = scene.spec;
  std::mt19937_64 rng(options.seed);
  const int g = options.girder >= 0 ? options.girder : (s.girders - 1) / 2;
  if (g >= s.girders) throw Error(ErrorKind::Validation, "girder index out of range");
  const double gx = scene.girder_x[static_cast<std::size_t>(g)];
  const double side = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  const double face = gx + side * 0.5 * s.girder_width;
  const double half_len = 0.5 * options.crop_length;
  const double yc = uniform(rng, scene.shared_y_min() + half_len, scene.shared_y_max() - half_len);
  const double top = s.deck_height;
  const double bottom = scene.girder_bottom();

  SessionSpec spec;
  const double inner = options.both_sides ? 0.5 * s.girder_width + options.crop_reach : 0.25 * s.girder_width;
  const double x0 = side < 0 ? face - options.crop_reach : gx - inner;
  const double x1 = side < 0 ? gx + inner : face + options.crop_reach;
  const double margin = std::min(options.crop_margin, 0.45 * s.girder_depth);
  spec.crop.min = {x0, yc - half_len, bottom + margin};
  spec.crop.max = {x1, yc + half_len, top - margin};
  spec.noise_sigma = options.noise_sigma;
  spec.seed = options.seed;

  for (int attempt = 0;; ++attempt) {
    const double d = uniform(rng, options.camera_min, options.camera_max);
    const Point3 cam(face + side * d, yc + uniform(rng, -1.0, 1.0), bottom + uniform(rng, -0.6, 0.4));
    if (!scene.occupied(cam, 0.3) || attempt > 1000) {
      spec.camera = cam;
      break;
    }
  }
  spec.orientation = OrientationENU::normalized(uniform(rng, -5.0, 5.0), uniform(rng, -10.0, 10.0),
                                                uniform(rng, -180.0, 180.0));
  spec.gaze = (spec.crop.center() - spec.camera).normalized();

  const double rot = options.max_rotation_deg * std::numbers::pi / 180.0;
  spec.a_true.rotation = yaw_rotation(uniform(rng, -rot, rot));
  spec.a_true.translation = {uniform(rng, -40.0, 40.0), uniform(rng, -40.0, 40.0), uniform(rng, -2.0, 2.0)};
  return spec;
}

double position_error(const LocalizationResult& result, const SessionSample& sample) {
  return (result.headset_position_ref - sample.camera_ref).norm();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent, reproducible seed per (base, trial).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

double median(std::vector<double> v) {
  if (v.empty()) return kInf;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) ? a : b;
  return 0.5 * (a + b);
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorKind::Internal, "cannot write " + file.string());
  return out;
}

std::string num(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double camera_error(const RigidTransform& a, const SessionSample& s) {
  return (a.apply(s.request.state.position) - s.camera_ref).norm();
}

}  // namespace

double WalkReport::jpil_median() const {
  std::vector<double> v;
  for (const WalkTrial& t : trials) v.push_back(t.jpil_min_area);
  return median(v);
}

double WalkReport::pc_median() const {
  std::vector<double> v;
  for (const WalkTrial& t : trials) v.push_back(t.pc_min_area);
  return median(v);
}

int WalkReport::jpil_successes_within(double area) const {
  return static_cast<int>(std::count_if(trials.begin(), trials.end(),
                                        [&](const WalkTrial& t) { return t.jpil_min_area <= area; }));
}

int WalkReport::flakes() const {
  return static_cast<int>(std::count_if(trials.begin(), trials.end(),
                                        [](const WalkTrial& t) { return t.jpil_regressions > 0; }));
}

WalkReport run_walk_cdf(const Scene& scene, const ReferenceModel& ref, const JpilConfig& cfg,
                        const WalkOptions& options) {
  if (options.trials < 1) throw Error(ErrorKind::Validation, "walk needs at least one trial");
  if (options.steps < 1 || !(options.step > 0) || !(options.start_length > 0)) {
    throw Error(ErrorKind::Validation, "walk steps must be positive");
  }
  const int trials = options.trials;
  std::vector<std::vector<WalkStep>> steps(static_cast<std::size_t>(trials));
  std::vector<WalkTrial> results(static_cast<std::size_t>(trials));

#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < trials; ++t) {
    WalkTrial& trial = results[static_cast<std::size_t>(t)];
    trial.seed = trial_seed(options.seed, static_cast<std::uint64_t>(t));
    PlacementOptions po = options.placement;
    po.seed = trial.seed;
    po.crop_length = options.start_length;
    SessionSpec spec = place_session(scene, po);
    std::mt19937_64 rng(trial.seed);
    const bool north = uniform(rng, 0.0, 1.0) < 0.5;
    const double anchor = north ? spec.crop.min.y() : spec.crop.max.y();

    SessionSample sample;
    sample.a_true = spec.a_true;
    sample.camera_ref = spec.camera;
    const RigidTransform to_session = spec.a_true.inverse();
    sample.request.state.position = to_session.apply(spec.camera);
    sample.request.state.orientation = spec.orientation;
    sample.request.state.gaze = (to_session.rotation * spec.gaze).normalized();
    sample.request.image = real_image(ref.bvh(), spec);

    trial.jpil_min_area = kInf;
    trial.pc_min_area = kInf;
    for (int k = 0; k < options.steps; ++k) {
      const double len = options.start_length + k * options.step;
      if (north) {
        spec.crop.max.y() = std::min(anchor + len, scene.spec.length + 0.05);
      } else {
        spec.crop.min.y() = std::max(anchor - len, -0.05);
      }
      WalkStep st;
      st.trial = t;
      st.step = k;
      sample.request.session_mesh = session_mesh(scene, spec, &st.area);
      st.jpil_error = kInf;
      st.pc_error = kInf;
      try {
        const LocalizationResult r = jpil(ref, sample.request, cfg);
        st.candidates = r.candidate_count;
        st.jpil_error = position_error(r, sample);
        st.jpil_gated = r.gate == Gate::ConfidentPositive;
        st.pc_error = camera_error(r.candidates.front().transform, sample);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoRegistration) throw;
      }
      const bool jpil_ok = st.jpil_error < options.success_error;
      if (jpil_ok && std::isinf(trial.jpil_min_area)) trial.jpil_min_area = st.area;
      if (!jpil_ok && !std::isinf(trial.jpil_min_area)) ++trial.jpil_regressions;
      if (st.pc_error < options.success_error && std::isinf(trial.pc_min_area)) {
        trial.pc_min_area = st.area;
      }
      steps[static_cast<std::size_t>(t)].push_back(st);
    }
  }

  WalkReport report;
  report.trials = std::move(results);
  for (auto& s : steps) report.steps.insert(report.steps.end(), s.begin(), s.end());
  return report;
}

void write_walk(const WalkReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "walk_steps.csv");
    out << "trial,step,area_m2,candidates,jpil_error_m,jpil_gated,pc_error_m\n";
    for (const WalkStep& s : report.steps) {
      out << s.trial << ',' << s.step << ',' << num(s.area) << ',' << s.candidates << ','
          << num(s.jpil_error) << ',' << (s.jpil_gated ? 1 : 0) << ',' << num(s.pc_error) << '\n';
    }
  }
  {
    auto out = open_out(dir / "walk_trials.csv");
    out << "trial,seed,method,min_area_m2,regressions\n";
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
      const WalkTrial& t = report.trials[i];
      out << i << ',' << t.seed << ",jpil," << num(t.jpil_min_area) << ',' << t.jpil_regressions << '\n';
      out << i << ',' << t.seed << ",point-cloud-only," << num(t.pc_min_area) << ",0\n";
    }
  }
  {
    std::vector<double> areas;
    for (const WalkStep& s : report.steps) areas.push_back(s.area);
    std::sort(areas.begin(), areas.end());
    areas.erase(std::unique(areas.begin(), areas.end()), areas.end());
    const double n = static_cast<double>(report.trials.size());
    auto out = open_out(dir / "walk_cdf.dat");
    out << "# area_m2 jpil_fraction point_cloud_only_fraction\n";
    for (double a : areas) {
      int j = 0;
      int p = 0;
      for (const WalkTrial& t : report.trials) {
        j += t.jpil_min_area <= a;
        p += t.pc_min_area <= a;
      }
      out << num(a) << ' ' << num(j / n) << ' ' << num(p / n) << '\n';
    }
  }
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::OrientationError: return "orientation-error";
    case SweepParameter::EpsQ: return "eps-q";
    case SweepParameter::EpsSigma: return "eps-sigma";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "orientation-error") return SweepParameter::OrientationError;
  if (name == "eps-q" || name == "eps_q") return SweepParameter::EpsQ;
  if (name == "eps-sigma" || name == "eps_sigma") return SweepParameter::EpsSigma;
  throw Error(ErrorKind::Validation, "unknown sweep parameter '" + std::string(name) + "'");
}

std::vector<SweepPoint> run_sweep(const Scene& scene, const ReferenceModel& ref,
                                  const JpilConfig& cfg, const SweepOptions& options) {
  if (options.grid.empty()) throw Error(ErrorKind::Validation, "sweep grid is empty");
  if (options.seeds < 1) throw Error(ErrorKind::Validation, "sweep needs at least one seed");
  for (double v : options.grid) {
    if (!std::isfinite(v) || v < 0) throw Error(ErrorKind::Validation, "sweep values must be finite and >= 0");
  }
  const std::size_t ng = options.grid.size();
  const int seeds = options.seeds;
  // errors[g][k], inliers[g][k]
  std::vector<std::vector<double>> errors(ng, std::vector<double>(static_cast<std::size_t>(seeds), kInf));
  std::vector<std::vector<double>> inliers(ng, std::vector<double>(static_cast<std::size_t>(seeds), 0.0));
  const OrbMatcher matcher(cfg.orb);

#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t seed = trial_seed(options.seed, static_cast<std::uint64_t>(k));
    PlacementOptions po = options.placement;
    po.seed = seed;
    SessionSpec spec = place_session(scene, po);
    spec.pixel_noise = options.pixel_noise;
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    const auto idx = static_cast<std::size_t>(k);

    if (options.parameter == SweepParameter::OrientationError) {
      const Vector3 signs(uniform(rng, 0, 1) < 0.5 ? -1 : 1, uniform(rng, 0, 1) < 0.5 ? -1 : 1,
                          uniform(rng, 0, 1) < 0.5 ? -1 : 1);
      for (std::size_t g = 0; g < ng; ++g) {
        const double v = options.grid[g];
        spec.frame_error = {signs.x() * v, signs.y() * v, signs.z() * v};
        const SessionSample sample = simulate_session(scene, ref.bvh(), spec);
        try {
          const LocalizationResult r = jpil(ref, sample.request, cfg, matcher);
          errors[g][idx] = position_error(r, sample);
          const CandidateReport& c = r.candidates[r.chosen];
          inliers[g][idx] = c.estimate ? static_cast<double>(c.estimate->inliers) : 0.0;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoRegistration) throw;
        }
      }
    } else {
      const double pe = options.cpe_prior_error;
      spec.orientation_error = {uniform(rng, -pe, pe), uniform(rng, -pe, pe), uniform(rng, -pe, pe)};
      Vector3 dir(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
      dir = dir.norm() > 1e-9 ? dir.normalized() : Vector3::UnitX();
      const Point3 x_init = spec.camera + options.cpe_offset * dir;
      SessionSample sample = simulate_session(scene, ref.bvh(), spec);
      for (std::size_t g = 0; g < ng; ++g) {
        JpilConfig c = cfg;
        if (options.parameter == SweepParameter::EpsQ) c.eps_q = options.grid[g];
        else c.eps_sigma = options.grid[g];
        CandidateReport rep;
        check_candidate(ref, sample.request, x_init, c, matcher, rep);
        if (rep.estimate) {
          errors[g][idx] = (rep.estimate->position - spec.camera).norm();
          inliers[g][idx] = static_cast<double>(rep.estimate->inliers);
        }
      }
    }
  }

  std::vector<SweepPoint> out;
  for (std::size_t g = 0; g < ng; ++g) {
    SweepPoint p;
    p.value = options.grid[g];
    p.errors = errors[g];
    double sum = 0, sum2 = 0, inl = 0;
    for (int k = 0; k < seeds; ++k) {
      const double e = errors[g][static_cast<std::size_t>(k)];
      ++p.runs;
      if (std::isinf(e)) {
        ++p.failures;
        continue;
      }
      sum += e;
      sum2 += e * e;
      inl += inliers[g][static_cast<std::size_t>(k)];
    }
    const int ok = p.runs - p.failures;
    if (ok > 0) {
      p.mean_error = sum / ok;
      p.std_error = ok > 1 ? std::sqrt(std::max(0.0, (sum2 - ok * p.mean_error * p.mean_error) / (ok - 1))) : 0.0;
      p.mean_inliers = inl / ok;
    } else {
      p.mean_error = kInf;
      p.std_error = kInf;
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_sweep(std::span<const SweepPoint> points, SweepParameter parameter,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto out = open_out(dir / (std::string("sweep_") + to_string(parameter) + ".csv"));
  out << "value,runs,failures,mean_error_m,std_error_m,mean_inliers\n";
  for (const SweepPoint& p : points) {
    out << num(p.value) << ',' << p.runs << ',' << p.failures << ',' << num(p.mean_error) << ','
        << num(p.std_error) << ',' << num(p.mean_inliers) << '\n';
  }
}

}  // namespace jpil
