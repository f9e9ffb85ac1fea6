#pragma once

// Serial, brute-force versions of the parallel kernels. Slow; used by the
// tests as oracles and by the kernel benchmark as the baseline.

#include "jpil/cpe.hpp"
#include "jpil/registration.hpp"
#include "jpil/spherical.hpp"

namespace jpil::serial {

// O(n^2) neighbor search, no grid, no threads.
std::vector<OrientedKeypoint> detect_keypoints(const PointCloud& cloud, const KeypointParams& params);

std::vector<TbscDescriptor> compute_tbsc_batch(const PointCloud& cloud,
                                               std::span<const OrientedKeypoint> keypoints,
                                               double radius, const TbscParams& params = {});

// Bit-by-bit comparison.
int hamming(const TbscDescriptor& a, const TbscDescriptor& b);

std::vector<Match> match_descriptors(const KeypointSet& source, const KeypointSet& target,
                                     double eps_desc);

// Every ray tested against every triangle.
SphericalRender render_spherical(const TriangleMesh& mesh, const Point3& position,
                                 const OrientationENU& orientation, const RenderParams& params = {});

std::vector<double> sigma_map(const SphericalRender& render, int n);

std::optional<PoseEstimate> ransac_snp(std::span<const Correspondence3d2d> corrs,
                                       const OrientationENU& q_prior, double eps_q,
                                       const Point3& x_init, const RansacOptions& ransac = {},
                                       const SnpOptions& options = {});

}  // namespace jpil::serial
