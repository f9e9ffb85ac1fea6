#include "jpil/mesh_io.hpp"
#include "jpil/service.hpp"
#include "jpil/synthbench.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace jpil;

namespace {

constexpr int kExitGated = 0;
constexpr int kExitFallback = 2;
constexpr int kExitNoRegistration = 3;
constexpr int kExitError = 1;

struct LocalizeArgs {
  std::string reference, session, image, pose, orient, gaze, config, cache;
  bool json = false;
};

struct BenchArgs {
  std::string kind, out, config, cache, parameter = "eps-q";
  std::vector<double> grid;
  int trials = 30, steps = 10, seeds = 10;
  std::uint64_t seed = 1, scene_seed = 1;
  double pixel_noise = 0.0, prior_error = 2.0, offset = 0.5;
};

struct SynthArgs {
  std::string out;
  std::uint64_t scene_seed = 1, seed = 1;
  double orientation_error = 0.0, pixel_noise = 0.0, crop_length = 2.8;
};

ServiceConfig load_settings(const std::string& config) {
  return config.empty() ? ServiceConfig{} : load_config(config);
}

void print_matrix(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  for (int r = 0; r < 4; ++r) {
    std::printf("%.17g %.17g %.17g %.17g\n", m(r, 0), m(r, 1), m(r, 2), m(r, 3));
  }
}

int run_localize(const LocalizeArgs& a) {
  ServiceConfig cfg = load_settings(a.config);
  if (!a.cache.empty()) cfg.cache_dir = a.cache;
  PoseFields pose;
  pose.position = parse_triple(a.pose);
  const Eigen::Vector3d q = parse_triple(a.orient);
  pose.orientation = {q[0], q[1], q[2]};
  if (!a.gaze.empty()) pose.gaze = parse_triple(a.gaze);

  const auto start = std::chrono::steady_clock::now();
  const std::string mesh = read_file(a.session);
  const std::string image = read_file(a.image);
  const LocalizationRequest req = load_request(as_bytes(mesh), as_bytes(image), pose);
  const auto ref = ReferenceModel::prepare(read_mesh(std::filesystem::path(a.reference)), cfg.jpil,
                                           cfg.cache_dir);
  try {
    const LocalizationResult result = jpil::jpil(*ref, req, cfg.jpil);
    if (a.json) {
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      std::cout << result_json(result, ms) << "\n";
    } else {
      print_matrix(result.transform);
      std::printf("gate %s\n", to_string(result.gate));
    }
    return result.gate == Gate::ConfidentPositive ? kExitGated : kExitFallback;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoRegistration) throw;
    if (a.json) std::cout << error_json(error_code(e.kind()), e.what()) << "\n";
    else std::printf("gate none\n");
    std::fprintf(stderr, "jpil: %s\n", e.what());
    return kExitNoRegistration;
  }
}

int run_bench(const BenchArgs& a) {
  ServiceConfig cfg = load_settings(a.config);
  if (!a.cache.empty()) cfg.cache_dir = a.cache;
  SceneSpec spec;
  spec.seed = a.scene_seed;
  const Scene scene = generate_scene(spec);
  const auto ref = ReferenceModel::prepare(scene.mesh, cfg.jpil, cfg.cache_dir);
  std::filesystem::create_directories(a.out);

  if (a.kind == "walk-cdf") {
    WalkOptions w;
    w.trials = a.trials;
    w.steps = a.steps;
    w.seed = a.seed;
    const WalkReport report = run_walk_cdf(scene, *ref, cfg.jpil, w);
    write_walk(report, a.out);
    std::printf("trials %d  median min-area jpil %.2f  point-cloud-only %.2f  flakes %d\n",
                a.trials, report.jpil_median(), report.pc_median(), report.flakes());
    return 0;
  }
  SweepOptions s;
  s.parameter = parse_sweep_parameter(a.parameter);
  s.grid = a.grid;
  if (s.grid.empty()) {
    switch (s.parameter) {
      case SweepParameter::OrientationError: s.grid = {0, 1, 2, 3, 4, 5}; break;
      case SweepParameter::EpsQ: s.grid = {2, 4, 8, 15, 30}; break;
      case SweepParameter::EpsSigma: s.grid = {0.05, 0.1, 0.25, 0.5, 1.0, 2.0}; break;
    }
  }
  s.seeds = a.seeds;
  s.seed = a.seed;
  s.pixel_noise = a.pixel_noise;
  s.cpe_prior_error = a.prior_error;
  s.cpe_offset = a.offset;
  const auto points = run_sweep(scene, *ref, cfg.jpil, s);
  write_sweep(points, s.parameter, a.out);
  for (const SweepPoint& p : points) {
    std::printf("%-8g runs %d failures %d mean %.4f std %.4f inliers %.1f\n", p.value, p.runs,
                p.failures, p.mean_error, p.std_error, p.mean_inliers);
  }
  return 0;
}

// Reference scene, or one session of it with the request arguments and the truth.
int run_synth_scene(const SynthArgs& a) {
  SceneSpec spec;
  spec.seed = a.scene_seed;
  write_ply(a.out, generate_scene(spec).mesh);
  return 0;
}

int run_synth_session(const SynthArgs& a) {
  SceneSpec spec;
  spec.seed = a.scene_seed;
  const Scene scene = generate_scene(spec);
  PlacementOptions place;
  place.seed = a.seed;
  place.crop_length = a.crop_length;
  SessionSpec session = place_session(scene, place);
  session.frame_error = {a.orientation_error, -a.orientation_error, a.orientation_error};
  session.pixel_noise = a.pixel_noise;
  const SessionSample sample = simulate_session(scene, session);

  const std::filesystem::path dir = a.out;
  std::filesystem::create_directories(dir);
  write_ply(dir / "session.ply", sample.request.session_mesh);
  write_png(dir / "image.png", sample.request.image);
  const HeadsetState& s = sample.request.state;
  char buf[512];
  std::snprintf(buf, sizeof buf, "--pose %.17g,%.17g,%.17g --orient %.17g,%.17g,%.17g\n",
                s.position.x(), s.position.y(), s.position.z(), s.orientation.roll,
                s.orientation.pitch, s.orientation.yaw);
  write_file(dir / "pose.args", buf);
  const Eigen::Matrix4d m = sample.a_true.matrix();
  std::string truth;
  for (int r = 0; r < 4; ++r) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", m(r, 0), m(r, 1), m(r, 2), m(r, 3));
    truth += buf;
  }
  std::snprintf(buf, sizeof buf, "camera %.17g %.17g %.17g\ncrop_area %.6g\n", sample.camera_ref.x(),
                sample.camera_ref.y(), sample.camera_ref.z(), sample.crop_area);
  truth += buf;
  write_file(dir / "truth.txt", truth);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint point cloud and image localization"};
  app.require_subcommand(1);

  LocalizeArgs loc;
  auto* localize = app.add_subcommand("localize", "Localize one session against a reference mesh");
  localize->add_option("--reference", loc.reference, "Reference mesh (PLY/OBJ)")->required()->check(CLI::ExistingFile);
  localize->add_option("--session", loc.session, "Session mesh (PLY/OBJ)")->required()->check(CLI::ExistingFile);
  localize->add_option("--image", loc.image, "Spherical image (PNG)")->required()->check(CLI::ExistingFile);
  localize->add_option("--pose", loc.pose, "Headset position x,y,z (session frame)")->required();
  localize->add_option("--orient", loc.orient, "Roll,pitch,yaw in degrees")->required();
  localize->add_option("--gaze", loc.gaze, "Gaze direction x,y,z");
  localize->add_option("--config", loc.config, "Config file")->check(CLI::ExistingFile);
  localize->add_option("--cache", loc.cache, "Reference cache directory");
  localize->add_flag("--json", loc.json, "Print the service response document");

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the localization service");
  serve->add_option("--config", serve_config, "Config file")->required()->check(CLI::ExistingFile);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Synthetic benchmarks");
  bench->add_option("kind", bench_args.kind, "walk-cdf or sweep")
      ->required()
      ->check(CLI::IsMember({"walk-cdf", "sweep"}));
  bench->add_option("--out", bench_args.out, "Output directory")->required();
  bench->add_option("--config", bench_args.config, "Config file")->check(CLI::ExistingFile);
  bench->add_option("--cache", bench_args.cache, "Reference cache directory");
  bench->add_option("--seed", bench_args.seed, "Benchmark seed");
  bench->add_option("--scene-seed", bench_args.scene_seed, "Scene seed");
  bench->add_option("--trials", bench_args.trials, "walk-cdf: number of walks");
  bench->add_option("--steps", bench_args.steps, "walk-cdf: crop growth steps per walk");
  bench->add_option("--parameter", bench_args.parameter, "sweep: orientation-error, eps-q or eps-sigma");
  bench->add_option("--grid", bench_args.grid, "sweep: grid values")->delimiter(',');
  bench->add_option("--seeds", bench_args.seeds, "sweep: seeds per grid point");
  bench->add_option("--pixel-noise", bench_args.pixel_noise, "sweep: grey-level noise on the image");
  bench->add_option("--prior-error", bench_args.prior_error, "sweep: orientation prior error, degrees");
  bench->add_option("--offset", bench_args.offset, "sweep: candidate offset from the truth, meters");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Write synthetic fixtures");
  synth->require_subcommand(1);
  auto* scene = synth->add_subcommand("scene", "Reference mesh of the girder scene");
  scene->add_option("--out", syn.out, "Output PLY")->required();
  scene->add_option("--scene-seed", syn.scene_seed, "Scene seed");
  auto* session = synth->add_subcommand("session", "Session mesh, image, pose and truth");
  session->add_option("--out", syn.out, "Output directory")->required();
  session->add_option("--scene-seed", syn.scene_seed, "Scene seed");
  session->add_option("--seed", syn.seed, "Placement seed");
  session->add_option("--orientation-error", syn.orientation_error, "Device frame error about every axis, degrees");
  session->add_option("--pixel-noise", syn.pixel_noise, "Grey-level noise");
  session->add_option("--crop-length", syn.crop_length, "Crop length along the girder, meters");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*localize) return run_localize(loc);
    if (*serve) return serve_localize(load_config(serve_config));
    if (*bench) return run_bench(bench_args);
    if (*scene) return run_synth_scene(syn);
    if (*session) return run_synth_session(syn);
  } catch (const Error& e) {
    std::fprintf(stderr, "jpil: %s error: %s\n", error_code(e.kind()), e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "jpil: %s\n", e.what());
  }
  return kExitError;
}
