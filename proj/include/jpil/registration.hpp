#pragma once

#include "jpil/descriptor.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace jpil {

struct KeypointSet {
  std::vector<OrientedKeypoint> keypoints;
  std::vector<TbscDescriptor> descriptors;

  std::size_t size() const { return keypoints.size(); }
};

// A source (session) keypoint paired with a target (reference) keypoint.
struct Match {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  Point3 source_position = Point3::Zero();
  Point3 target_position = Point3::Zero();
  int distance = 0;

  Vector3 offset() const { return target_position - source_position; }
  bool operator==(const Match&) const = default;
};

// Every (source, target) pair with Hamming distance < c_max * eps_desc,
// ordered source-major then by target index.
std::vector<Match> match_descriptors(const KeypointSet& source, const KeypointSet& target,
                                     double eps_desc);

struct ClusterParams {
  double eps_clust = 0.8;
  std::size_t min_cluster = 5;
};

// Greedy single pass: the first unassigned match seeds a cluster and every
// later unassigned match whose per-axis offset residuals against the seed sum
// to less than 3 * eps_clust joins it. Returns all clusters in seed order.
std::vector<std::vector<std::uint32_t>> cluster_matches(std::span<const Match> matches,
                                                        double eps_clust);

struct Candidate {
  std::vector<Match> matches;
  RigidTransform transform;
  int align_cost = 0;
  // Set when the matched source points were too degenerate for a rotation fit
  // and the transform is the mean offset.
  bool translation_only = false;
};

using AlignCostFn = std::function<int(const RigidTransform&)>;

// Clusters with at least min_cluster members become candidates, sorted by
// ascending alignment cost (stable, so seed order breaks ties).
std::vector<Candidate> find_reg_candidates(std::span<const Match> matches,
                                           const ClusterParams& params, const AlignCostFn& cost);

// Least-squares rigid fit target ~= R * source + t (SVD, reflection corrected).
// Throws Error(Degenerate) for fewer than 3 pairs or collinear sources.
RigidTransform rigid_transform(std::span<const std::pair<Point3, Point3>> pairs);

// Hamming distance between one large-support descriptor of the transformed
// session cloud and one of the reference clipped to its bounding box, both
// centred on the box. Returns c_max when the clipped region is empty.
int align_cost(const RigidTransform& a, const PointCloud& reference, const PointCloud& session,
               const TbscParams& params = {});

}  // namespace jpil
