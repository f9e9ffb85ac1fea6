#include "jpil/registration.hpp"
#include "jpil/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace jpil {

std::vector<Match> match_descriptors(const KeypointSet& source, const KeypointSet& target,
                                     double eps_desc) {
  if (!(eps_desc > 0.0 && eps_desc <= 1.0)) {
    throw Error(ErrorKind::Validation, "eps_desc must lie in (0, 1]");
  }
  if (source.size() == 0 || target.size() == 0) return {};
  const double c_max = static_cast<double>(source.descriptors.front().bits);
  const double limit = c_max * eps_desc;

  const auto n = static_cast<std::int64_t>(source.size());
  std::vector<std::vector<Match>> rows(source.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::uint32_t>(i);
    auto& row = rows[s];
    for (std::uint32_t t = 0; t < target.size(); ++t) {
      const int d = hamming(source.descriptors[s], target.descriptors[t]);
      if (static_cast<double>(d) < limit) {
        row.push_back({s, t, source.keypoints[s].position, target.keypoints[t].position, d});
      }
    }
  }
  std::vector<Match> out;
  for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::vector<std::vector<std::uint32_t>> cluster_matches(std::span<const Match> matches,
                                                        double eps_clust) {
  if (!(eps_clust > 0.0)) throw Error(ErrorKind::Validation, "eps_clust must be positive");
  std::vector<std::vector<std::uint32_t>> clusters;
  std::vector<std::uint8_t> assigned(matches.size(), 0);
  const double limit = 3.0 * eps_clust;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (assigned[i]) continue;
    assigned[i] = 1;
    const Vector3 seed = matches[i].offset();
    std::vector<std::uint32_t> cluster{static_cast<std::uint32_t>(i)};
    for (std::size_t j = i + 1; j < matches.size(); ++j) {
      if (assigned[j]) continue;
      const double e = (seed - matches[j].offset()).cwiseAbs().sum();
      if (e < limit) {
        cluster.push_back(static_cast<std::uint32_t>(j));
        assigned[j] = 1;
      }
    }
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

RigidTransform rigid_transform(std::span<const std::pair<Point3, Point3>> pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorKind::Degenerate, "rigid transform needs at least 3 point pairs");
  }
  Point3 src_mean = Point3::Zero();
  Point3 dst_mean = Point3::Zero();
  for (const auto& [s, d] : pairs) {
    src_mean += s;
    dst_mean += d;
  }
  src_mean /= static_cast<double>(pairs.size());
  dst_mean /= static_cast<double>(pairs.size());

  Matrix3 cov = Matrix3::Zero();
  Matrix3 src_scatter = Matrix3::Zero();
  for (const auto& [s, d] : pairs) {
    const Vector3 a = s - src_mean;
    cov.noalias() += a * (d - dst_mean).transpose();
    src_scatter.noalias() += a * a.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> scatter(src_scatter);
  const double largest = scatter.eigenvalues()[2];
  if (!(largest > 0.0) || scatter.eigenvalues()[1] <= 1e-10 * largest) {
    throw Error(ErrorKind::Degenerate, "source points are collinear or coincident");
  }

  Eigen::JacobiSVD<Matrix3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 fix = Matrix3::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  RigidTransform t;
  t.rotation = v * fix * u.transpose();
  t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

std::vector<Candidate> find_reg_candidates(std::span<const Match> matches,
                                           const ClusterParams& params, const AlignCostFn& cost) {
  std::vector<Candidate> out;
  for (const auto& cluster : cluster_matches(matches, params.eps_clust)) {
    if (cluster.size() < params.min_cluster) continue;
    Candidate c;
    std::vector<std::pair<Point3, Point3>> pairs;
    for (std::uint32_t idx : cluster) {
      c.matches.push_back(matches[idx]);
      pairs.emplace_back(matches[idx].source_position, matches[idx].target_position);
    }
    try {
      c.transform = rigid_transform(pairs);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      Vector3 mean = Vector3::Zero();
      for (const Match& m : c.matches) mean += m.offset();
      c.transform = RigidTransform::from_translation(mean / static_cast<double>(c.matches.size()));
      c.translation_only = true;
    }
    c.align_cost = cost ? cost(c.transform) : 0;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.align_cost < b.align_cost;
  });
  return out;
}

int align_cost(const RigidTransform& a, const PointCloud& reference, const PointCloud& session,
               const TbscParams& params) {
  const int c_max = static_cast<int>(params.length());
  if (session.empty()) return c_max;
  const PointCloud aligned = transform_cloud(session, a);
  const BoundingBox box = BoundingBox::of(aligned.points);
  const PointCloud clipped = clip_box(reference, box);
  if (clipped.empty()) return c_max;
  const double radius = box.longest_side();
  if (!(radius > 0.0)) return c_max;
  const Point3 center = box.center();
  const TbscDescriptor d1 = compute_tbsc_at(aligned.points, center, enu_frame(), radius, params);
  const TbscDescriptor d2 = compute_tbsc_at(clipped.points, center, enu_frame(), radius, params);
  return hamming(d1, d2);
}

}  // namespace jpil
