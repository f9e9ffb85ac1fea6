#pragma once

#include "jpil/cpe.hpp"
#include "jpil/registration.hpp"

#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace jpil {

struct JpilConfig {
  double sample_density = 100.0;  // points per m^2
  std::uint64_t seed = 1;         // sampling seed; the session uses seed + 1
  KeypointParams keypoints;
  TbscParams tbsc;
  double desc_radius = 0.6;  // keypoint descriptor support, meters
  double eps_desc = 0.25;
  ClusterParams cluster;
  RenderParams render;  // size of the synthetic "real" images in synthbench
  int sigma_kernel = 2;
  double eps_sigma = 0.5;
  double eps_q = 4.0;
  double eps_plus = 1.5;
  RansacOptions ransac;
  OrbParams orb;
  bool image_gate = true;  // false: point-cloud-only mode, pure argmin cost

  // Hash of the settings that shape the reference precompute.
  std::uint64_t reference_hash() const;
  // Throws Error(Validation) on out-of-range values.
  void validate() const;
};

// Reference mesh with its sampled cloud, keypoints and descriptors. Immutable
// after construction and safe to share between threads.
class ReferenceModel {
 public:
  ReferenceModel(TriangleMesh mesh, const JpilConfig& cfg);

  // Loads the precompute from cache_dir when a matching entry exists,
  // otherwise computes it and writes the entry.
  static std::shared_ptr<const ReferenceModel> prepare(TriangleMesh mesh, const JpilConfig& cfg,
                                                       const std::filesystem::path& cache_dir = {});

  const TriangleMesh& mesh() const { return bvh_.mesh(); }
  const Bvh& bvh() const { return bvh_; }
  const PointCloud& cloud() const { return cloud_; }
  const KeypointSet& features() const { return features_; }
  std::uint64_t key() const { return key_; }
  bool loaded_from_cache() const { return from_cache_; }

  void save(const std::filesystem::path& file) const;

 private:
  ReferenceModel(TriangleMesh mesh, std::uint64_t key);
  bool load(const std::filesystem::path& file);

  Bvh bvh_;
  PointCloud cloud_;
  KeypointSet features_;
  std::uint64_t key_ = 0;
  bool from_cache_ = false;
};

// FNV-1a over vertex and index data.
std::uint64_t mesh_hash(const TriangleMesh& mesh);

struct LocalizationRequest {
  TriangleMesh session_mesh;  // M', session frame
  HeadsetState state;         // x'_t, q_t, gaze in the session frame
  SphericalImage image;       // I_t

  // Throws Error(Validation): empty mesh, non-2:1 image.
  void validate() const;
};

enum class Gate { ConfidentPositive, FallbackMinCost };
const char* to_string(Gate gate);

struct CandidateReport {
  RigidTransform transform;
  int align_cost = 0;
  std::size_t matches = 0;
  bool evaluated = false;  // rendered and checked by the image gate
  std::size_t correspondences = 0;
  std::optional<PoseEstimate> estimate;
  double c_image = std::numeric_limits<double>::infinity();
  bool confident = false;
};

struct LocalizationResult {
  RigidTransform transform;
  Gate gate = Gate::FallbackMinCost;
  std::size_t candidate_count = 0;
  std::size_t chosen = 0;  // index into candidates (ascending cost order)
  Point3 headset_position_ref = Point3::Zero();
  std::vector<CandidateReport> candidates;
};

// Keypoints and descriptors of a session cloud with the same settings as the
// reference.
KeypointSet describe(const PointCloud& cloud, const JpilConfig& cfg);

// Registration candidates of the session mesh against the reference, sorted
// by ascending alignment cost.
std::vector<Candidate> session_candidates(const ReferenceModel& ref, const TriangleMesh& session,
                                          const JpilConfig& cfg);

// Image gate for one candidate camera position: synthetic render at x_cand
// with the reported orientation, 3D-2D correspondences, RANSAC pose, C_image.
void check_candidate(const ReferenceModel& ref, const LocalizationRequest& req,
                     const Point3& x_cand, const JpilConfig& cfg, const FeatureMatcher& matcher,
                     CandidateReport& rep);

// Candidate loop with the image gate. Throws Error(NoRegistration) when no
// candidate exists.
LocalizationResult jpil(const ReferenceModel& ref, const LocalizationRequest& req,
                        const JpilConfig& cfg, const FeatureMatcher& matcher);
LocalizationResult jpil(const ReferenceModel& ref, const LocalizationRequest& req,
                        const JpilConfig& cfg);

// Gaze raycast from the headset, carried into the reference frame.
std::optional<Point3> measure_point(const LocalizationResult& result, const Bvh& reference,
                                    const HeadsetState& state);
std::optional<Point3> measure_point(const LocalizationResult& result,
                                    const TriangleMesh& reference, const HeadsetState& state);

}  // namespace jpil
