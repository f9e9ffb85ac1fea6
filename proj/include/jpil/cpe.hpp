#pragma once

#include "jpil/features.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jpil {

struct Correspondence3d2d {
  Point3 point = Point3::Zero();                  // backtracked from the synthetic render
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();  // in the real image
  double sigma = 0.0;                             // meters, at the synthetic pixel
};

// Keeps matches whose synthetic pixel has a valid backtrack with sigma <= eps_sigma.
std::vector<Correspondence3d2d> correspondences_from_matches(std::span<const PixelMatch> matches,
                                                             const SphericalRender& synth,
                                                             double eps_sigma);

// Matches the images and lifts the survivors to 3D-2D correspondences. The
// render must carry a sigma map.
std::vector<Correspondence3d2d> build_correspondences(const SphericalImage& real,
                                                      const SphericalRender& synth,
                                                      double eps_sigma,
                                                      const FeatureMatcher& matcher);

// Text format: one "px py X Y Z sigma" line per correspondence.
std::vector<Correspondence3d2d> read_correspondences(const std::filesystem::path& path);
std::vector<Correspondence3d2d> parse_correspondences(std::string_view text);
std::string format_correspondences(std::span<const Correspondence3d2d> corrs);

struct PoseEstimate {
  OrientationENU orientation;
  Point3 position = Point3::Zero();
  std::size_t inliers = 0;
  double residual = 0.0;  // final C_SnP
};

// Pose parameters in solver order: roll, pitch, yaw (radians), then x, y, z.
using PoseVector = Eigen::Matrix<double, 6, 1>;

// Camera-frame unit vector towards `point` for a camera with pose `pose`.
Vector3 project_to_sphere(const Point3& point, const PoseVector& pose);
// d project_to_sphere / d pose.
Eigen::Matrix<double, 3, 6> projection_jacobian(const Point3& point, const PoseVector& pose);

struct SnpOptions {
  int width = 1280;
  int height = 640;
  int max_iterations = 200;
};

// 0.5 * sum |p_k^s(pose) - bearing(pixel_k)|^2
double snp_cost(std::span<const Correspondence3d2d> corrs, const PoseVector& pose,
                const SnpOptions& options);

// Box-constrained Levenberg-Marquardt from (q_prior, x_init); every angle
// stays within eps_q degrees of the prior. Returns nullopt when the problem is
// rank deficient or the solve diverges. Throws on fewer than 3 correspondences.
std::optional<PoseEstimate> solve_snp(std::span<const Correspondence3d2d> corrs,
                                      const OrientationENU& q_prior, double eps_q,
                                      const Point3& x_init, const SnpOptions& options = {});

struct RansacOptions {
  int iterations = 500;
  double inlier_threshold = 0.01;  // radians between projected and observed rays
  std::uint64_t seed = 7;
};

// Minimal three-point hypotheses scored by inlier count, then a final solve on
// the best inlier set. Reproducible for a fixed seed; hypotheses are evaluated
// in parallel. nullopt when fewer than 4 inliers support the best hypothesis.
std::optional<PoseEstimate> ransac_snp(std::span<const Correspondence3d2d> corrs,
                                       const OrientationENU& q_prior, double eps_q,
                                       const Point3& x_init, const RansacOptions& ransac = {},
                                       const SnpOptions& options = {});

// Building blocks of ransac_snp, shared with the serial reference:
// pre-drawn minimal samples, one hypothesis solve from (q_prior, x_init),
// inlier counting, and the final solve on the inliers of the best hypothesis
// (nullopt below 4 inliers).
std::vector<std::array<std::size_t, 3>> ransac_samples(std::size_t n, const RansacOptions& ransac);
std::optional<PoseVector> ransac_hypothesis(std::span<const Correspondence3d2d> corrs,
                                            const std::array<std::size_t, 3>& sample,
                                            const OrientationENU& q_prior, double eps_q,
                                            const Point3& x_init, const SnpOptions& options);
std::size_t count_inliers(std::span<const Correspondence3d2d> corrs, const PoseVector& pose,
                          double threshold, const SnpOptions& options);
std::optional<PoseEstimate> ransac_finish(std::span<const Correspondence3d2d> corrs,
                                          const OrientationENU& q_prior, double eps_q,
                                          const PoseVector& best, const RansacOptions& ransac,
                                          const SnpOptions& options);

// Inlier flags for a pose (angular residual below threshold).
std::vector<std::uint8_t> inlier_mask(std::span<const Correspondence3d2d> corrs,
                                      const PoseVector& pose, double threshold,
                                      const SnpOptions& options);

PoseVector to_pose_vector(const OrientationENU& q, const Point3& x);
PoseEstimate to_estimate(const PoseVector& pose);

// Position disagreement between a candidate camera and the estimate, meters.
double c_image(const Point3& x_candidate, const PoseEstimate& estimate);

// Confident positive: dist <= eps_plus.
bool confident_positive(double dist, double eps_plus);

}  // namespace jpil
