#pragma once

#include "jpil/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jpil {

// Bridge-like lattice: parallel girders along North under a deck slab. Every
// girder carries the same stiffener and bracket pattern inside the shared zone, which
// makes the structure translationally symmetric there; outside it each girder
// gets its own pattern. Utility boxes hang from the deck in the bays.
struct SceneSpec {
  int girders = 3;
  double spacing = 6.0;  // girder centre distance along East
  double girder_width = 1.2;  // box girders
  double girder_depth = 2.0;
  double length = 30.0;  // along North
  double deck_thickness = 0.25;
  double deck_overhang = 1.5;
  double deck_height = 4.0;         // underside of the deck above z = 0
  double shared_zone = 12.0;        // length of the symmetric stretch, centred on the girders
  int stiffeners_per_side = 0;      // inside the shared zone
  int brackets_per_side = 40;       // compact blocks on the web, shared zone
  int unique_details = 60;          // brackets per girder side outside the shared zone
  int clutter = 60;                 // boxes hanging in the bays
  double clutter_clearance = 1.0;   // kept free around every girder
  std::uint64_t seed = 1;

  void validate() const;
};

struct SceneBox {
  Point3 center = Point3::Zero();
  Vector3 half = Vector3::Zero();
  double yaw = 0.0;  // radians about Up

  double area() const {
    return 8.0 * (half.x() * half.y() + half.y() * half.z() + half.z() * half.x());
  }
};

struct Scene {
  SceneSpec spec;
  std::vector<SceneBox> boxes;
  TriangleMesh mesh;
  std::vector<double> girder_x;  // East coordinate of every girder axis

  double shared_y_min() const { return 0.5 * (spec.length - spec.shared_zone); }
  double shared_y_max() const { return 0.5 * (spec.length + spec.shared_zone); }
  double girder_bottom() const { return spec.deck_height - spec.girder_depth; }
  // Whether p lies inside any scene box (expanded by margin).
  bool occupied(const Point3& p, double margin = 0.0) const;
};

Scene generate_scene(const SceneSpec& spec);

// One simulated inspection session.
struct SessionSpec {
  BoundingBox crop;                 // reference-frame region that was mapped
  double noise_sigma = 0.0;         // vertex perturbation, meters
  double remesh_edge = 0.2;         // crop is subdivided to this edge length
  RigidTransform a_true;            // maps session coordinates into the reference
  Point3 camera = Point3::Zero();   // true headset position, reference frame
  OrientationENU orientation;       // true headset orientation
  OrientationENU orientation_error; // added to the reported orientation only
  // The device's ENU frame is off by this much: the map and the reported
  // orientation are both expressed in the rotated frame, folded into a_true.
  OrientationENU frame_error;
  Vector3 gaze = Vector3::UnitY();  // reference frame
  double pixel_noise = 0.0;         // Gaussian intensity noise, grey levels
  RenderParams render;
  std::uint64_t seed = 1;
};

struct SessionSample {
  LocalizationRequest request;
  RigidTransform a_true;
  Point3 camera_ref = Point3::Zero();
  double crop_area = 0.0;  // surface area of the remeshed crop, m^2
};

// Throws Error(Validation) when the crop holds no surface.
SessionSample simulate_session(const Scene& scene, const SessionSpec& spec);
// The two halves of simulate_session: the remeshed, perturbed crop in the
// session frame (area of the remeshed crop in *area), and the real image.
TriangleMesh session_mesh(const Scene& scene, const SessionSpec& spec, double* area = nullptr);
SphericalImage real_image(const Bvh& scene_bvh, const SessionSpec& spec);
// Variant that reuses a BVH of scene.mesh for the real image.
SessionSample simulate_session(const Scene& scene, const Bvh& scene_bvh, const SessionSpec& spec);

// Seeded placement used by the benchmarks: a crop on the side of one girder
// inside the shared zone (about 5 m^2 at the default length), a headset
// 1.5 - 2.5 m away in the adjacent bay, a random A_true.
struct PlacementOptions {
  int girder = -1;  // -1: middle girder
  double crop_length = 2.8;
  double crop_reach = 0.35;  // how far the crop extends off the girder side
  bool both_sides = false;   // crop the whole girder cross-section
  double crop_margin = 0.35;  // kept free below the deck and above the girder bottom
  double camera_min = 1.5;
  double camera_max = 2.5;
  double max_rotation_deg = 0.0;  // rotation part of A_true about Up
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
};
SessionSpec place_session(const Scene& scene, const PlacementOptions& options);

// Position error of a localization against the truth of a session, meters.
double position_error(const LocalizationResult& result, const SessionSample& sample);

// Random walks along a girder side. Each walk starts at a random point in the
// shared zone and the mapped crop grows by `step` meters per step in one
// direction; the headset stays at the walk start.
struct WalkOptions {
  int trials = 30;
  double start_length = 1.0;
  double step = 1.0;
  int steps = 12;
  double success_error = 0.6;  // meters
  PlacementOptions placement;
  std::uint64_t seed = 1;
};

struct WalkStep {
  int trial = 0;
  int step = 0;
  double area = 0.0;  // surface area of the remeshed crop
  std::size_t candidates = 0;
  double jpil_error = 0.0;  // inf when registration produced no candidate
  bool jpil_gated = false;
  double pc_error = 0.0;  // point-cloud-only: argmin-cost candidate
};

struct WalkTrial {
  std::uint64_t seed = 0;
  double jpil_min_area = 0.0;  // inf when the walk never succeeded
  double pc_min_area = 0.0;
  // Steps after the first success that failed again.
  int jpil_regressions = 0;
};

struct WalkReport {
  std::vector<WalkStep> steps;
  std::vector<WalkTrial> trials;

  double jpil_median() const;  // inf-aware medians of the minimum areas
  double pc_median() const;
  int jpil_successes_within(double area) const;
  // Trials whose success was not monotone in the area.
  int flakes() const;
};

WalkReport run_walk_cdf(const Scene& scene, const ReferenceModel& ref, const JpilConfig& cfg,
                        const WalkOptions& options);

// walk_steps.csv, walk_trials.csv and walk_cdf.dat (area, JPIL fraction,
// point-cloud-only fraction) for gnuplot.
void write_walk(const WalkReport& report, const std::filesystem::path& dir);

enum class SweepParameter { OrientationError, EpsQ, EpsSigma };
const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

// orientation-error: end-to-end position error with the device frame off by
// +-value degrees about every axis (map and reported orientation alike). eps-q and eps-sigma: camera pose error of the image
// check alone, started from a candidate `cpe_offset` meters from the truth
// with the orientation prior off by up to `cpe_prior_error` degrees.
struct SweepOptions {
  SweepParameter parameter = SweepParameter::EpsQ;
  std::vector<double> grid;
  int seeds = 10;
  std::uint64_t seed = 1;
  double cpe_offset = 0.5;
  double cpe_prior_error = 2.0;
  double pixel_noise = 0.0;  // grey levels added to the real image
  PlacementOptions placement;
};

struct SweepPoint {
  double value = 0.0;
  int runs = 0;
  int failures = 0;  // no estimate, or no registration
  double mean_error = 0.0;  // over runs that produced a position
  double std_error = 0.0;
  double mean_inliers = 0.0;
  std::vector<double> errors;  // per seed, inf on failure
};

std::vector<SweepPoint> run_sweep(const Scene& scene, const ReferenceModel& ref,
                                  const JpilConfig& cfg, const SweepOptions& options);

// sweep_<parameter>.csv with value, runs, failures, mean, std, mean inliers.
void write_sweep(std::span<const SweepPoint> points, SweepParameter parameter,
                 const std::filesystem::path& dir);

}  // namespace jpil
