#include "jpil/cpe.hpp"
#include "jpil/error.hpp"
#include "jpil/mesh_io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace jpil {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kHypothesisIterations = 50;

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Matrix3 pose_rotation(const PoseVector& pose) {
  return rotation_from_rpy_radians(pose[0], pose[1], pose[2]);
}

std::vector<Vector3> bearings(std::span<const Correspondence3d2d> corrs, const SnpOptions& o) {
  std::vector<Vector3> out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) out.push_back(pixel_to_ray_camera(c.pixel.x(), c.pixel.y(), o.width, o.height));
  return out;
}

double cost_with(std::span<const Correspondence3d2d> corrs, std::span<const Vector3> obs,
                 const PoseVector& pose) {
  const Matrix3 rt = pose_rotation(pose).transpose();
  double sum = 0.0;
  for (std::size_t k = 0; k < corrs.size(); ++k) {
    const Vector3 u = corrs[k].point - pose.tail<3>();
    const double n = u.norm();
    if (!(n > 1e-12)) return std::numeric_limits<double>::infinity();
    sum += (rt * u / n - obs[k]).squaredNorm();
  }
  return 0.5 * sum;
}

struct Box {
  Eigen::Vector3d lower;
  Eigen::Vector3d upper;
};

Box angle_box(const OrientationENU& q_prior, double eps_q) {
  const Eigen::Vector3d c(q_prior.roll * kDeg, q_prior.pitch * kDeg, q_prior.yaw * kDeg);
  const Eigen::Vector3d e = Eigen::Vector3d::Constant(eps_q * kDeg);
  return {c - e, c + e};
}

PoseVector clamp_to(const PoseVector& p, const Box& box) {
  PoseVector out = p;
  for (int i = 0; i < 3; ++i) out[i] = std::clamp(out[i], box.lower[i], box.upper[i]);
  return out;
}

struct SolveResult {
  PoseVector pose;
  double cost = 0.0;
  bool ok = false;
};

// Levenberg-Marquardt on the six pose parameters with the three angles held in
// a box. Angles sitting on a bound whose gradient points outwards are frozen
// for the step; steps are projected back onto the box.
SolveResult solve_boxed(std::span<const Correspondence3d2d> corrs, std::span<const Vector3> obs,
                        const Box& box, const PoseVector& init, int max_iterations) {
  SolveResult res;
  PoseVector p = clamp_to(init, box);
  double cost = cost_with(corrs, obs, p);
  if (!std::isfinite(cost)) return res;

  double lambda = 1e-3;
  Eigen::Matrix<double, 6, 6> jtj;
  Eigen::Matrix<double, 6, 1> g;
  for (int iter = 0; iter < max_iterations; ++iter) {
    jtj.setZero();
    g.setZero();
    const Matrix3 rt = pose_rotation(p).transpose();
    for (std::size_t k = 0; k < corrs.size(); ++k) {
      const Eigen::Matrix<double, 3, 6> j = projection_jacobian(corrs[k].point, p);
      const Vector3 u = corrs[k].point - p.tail<3>();
      const Vector3 r = rt * u / u.norm() - obs[k];
      jtj.noalias() += j.transpose() * j;
      g.noalias() += j.transpose() * r;
    }

    std::array<bool, 6> free{};
    for (int i = 0; i < 6; ++i) free[i] = true;
    constexpr double kBoundTol = 1e-15;
    for (int i = 0; i < 3; ++i) {
      if (p[i] <= box.lower[i] + kBoundTol && g[i] > 0) free[i] = false;
      if (p[i] >= box.upper[i] - kBoundTol && g[i] < 0) free[i] = false;
    }
    double gnorm = 0.0;
    for (int i = 0; i < 6; ++i) {
      if (free[i]) gnorm = std::max(gnorm, std::abs(g[i]));
    }
    if (gnorm < 1e-16) break;

    bool improved = false;
    while (lambda < 1e16) {
      Eigen::Matrix<double, 6, 6> a = jtj;
      Eigen::Matrix<double, 6, 1> b = -g;
      for (int i = 0; i < 6; ++i) {
        if (!free[i]) {
          a.row(i).setZero();
          a.col(i).setZero();
          a(i, i) = 1.0;
          b[i] = 0.0;
        } else {
          a(i, i) += lambda * std::max(jtj(i, i), 1e-12);
        }
      }
      const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(a);
      const Eigen::Matrix<double, 6, 1> step = ldlt.solve(b);
      if (!step.allFinite()) {
        lambda *= 4.0;
        continue;
      }
      const PoseVector cand = clamp_to(p + step, box);
      const double cand_cost = cost_with(corrs, obs, cand);
      if (cand_cost < cost) {
        const double rel = (cost - cand_cost) / std::max(cost, 1e-300);
        const double move = (cand - p).norm();
        p = cand;
        cost = cand_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (move < 1e-14 * (1.0 + p.norm()) || rel < 1e-15) iter = max_iterations;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }

  if (!std::isfinite(cost) || !p.allFinite()) return res;

  // Rank check on the final normal matrix restricted to the position block and
  // any angle that can still move.
  jtj.setZero();
  for (std::size_t k = 0; k < corrs.size(); ++k) {
    const auto j = projection_jacobian(corrs[k].point, p);
    jtj.noalias() += j.transpose() * j;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(jtj);
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0) || es.eigenvalues().minCoeff() < 1e-12 * top) return res;

  res.pose = p;
  res.cost = cost;
  res.ok = true;
  return res;
}

std::size_t count_inliers(std::span<const Correspondence3d2d> corrs, std::span<const Vector3> obs,
                          const PoseVector& pose, double chord) {
  const Matrix3 rt = pose_rotation(pose).transpose();
  std::size_t n = 0;
  for (std::size_t k = 0; k < corrs.size(); ++k) {
    const Vector3 u = corrs[k].point - pose.tail<3>();
    const double len = u.norm();
    if (!(len > 1e-12)) continue;
    if ((rt * u / len - obs[k]).norm() < chord) ++n;
  }
  return n;
}

}  // namespace

std::vector<Correspondence3d2d> correspondences_from_matches(std::span<const PixelMatch> matches,
                                                             const SphericalRender& synth,
                                                             double eps_sigma) {
  if (synth.sigma.size() != synth.backtrack.size()) {
    throw Error(ErrorKind::Validation, "synthetic render carries no sigma map");
  }
  const int w = synth.width();
  const int h = synth.height();
  std::vector<Correspondence3d2d> out;
  for (const PixelMatch& m : matches) {
    const long sx = std::lround(m.synth.x());
    const long sy = std::lround(m.synth.y());
    if (sy < 0 || sy >= h) continue;
    const int x = static_cast<int>(((sx % w) + w) % w);
    const int y = static_cast<int>(sy);
    if (!synth.valid(x, y)) continue;
    const double sigma = synth.sigma[synth.index(x, y)];
    if (!(sigma <= eps_sigma)) continue;
    out.push_back({synth.backtrack[synth.index(x, y)], m.real, sigma});
  }
  return out;
}

std::vector<Correspondence3d2d> build_correspondences(const SphericalImage& real,
                                                      const SphericalRender& synth,
                                                      double eps_sigma,
                                                      const FeatureMatcher& matcher) {
  if (real.width != synth.width() || real.height != synth.height()) {
    throw Error(ErrorKind::Validation, "real and synthetic images differ in size");
  }
  const std::vector<PixelMatch> matches = matcher.match(real, synth.image);
  return correspondences_from_matches(matches, synth, eps_sigma);
}

std::vector<Correspondence3d2d> parse_correspondences(std::string_view text) {
  std::vector<Correspondence3d2d> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    const std::size_t line_start = pos;
    pos = end + 1;
    ++line_no;

    double v[6];
    int n = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size() || line[i] == '#') break;
      if (n == 6) {
        throw Error(ErrorKind::Parse, "correspondence line " + std::to_string(line_no) +
                                          ": too many fields at byte " +
                                          std::to_string(line_start + i));
      }
      const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v[n]);
      if (ec != std::errc()) {
        throw Error(ErrorKind::Parse, "correspondence line " + std::to_string(line_no) +
                                          ": bad number at byte " +
                                          std::to_string(line_start + i));
      }
      i = static_cast<std::size_t>(ptr - line.data());
      ++n;
    }
    if (n == 0) continue;
    if (n != 6) {
      throw Error(ErrorKind::Parse, "correspondence line " + std::to_string(line_no) +
                                        ": expected 6 fields, got " + std::to_string(n));
    }
    out.push_back({Point3(v[2], v[3], v[4]), Eigen::Vector2d(v[0], v[1]), v[5]});
  }
  return out;
}

std::vector<Correspondence3d2d> read_correspondences(const std::filesystem::path& path) {
  return parse_correspondences(read_file(path));
}

std::string format_correspondences(std::span<const Correspondence3d2d> corrs) {
  std::string out;
  char buf[256];
  for (const auto& c : corrs) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g\n", c.pixel.x(),
                  c.pixel.y(), c.point.x(), c.point.y(), c.point.z(), c.sigma);
    out += buf;
  }
  return out;
}

Vector3 project_to_sphere(const Point3& point, const PoseVector& pose) {
  return (pose_rotation(pose).transpose() * (point - pose.tail<3>())).normalized();
}

Eigen::Matrix<double, 3, 6> projection_jacobian(const Point3& point, const PoseVector& pose) {
  const Eigen::AngleAxisd rz(-pose[2], Vector3::UnitZ());
  const Eigen::AngleAxisd rx(pose[1], Vector3::UnitX());
  const Eigen::AngleAxisd ry(pose[0], Vector3::UnitY());
  const Matrix3 mz = rz.toRotationMatrix();
  const Matrix3 mx = rx.toRotationMatrix();
  const Matrix3 my = ry.toRotationMatrix();
  const Matrix3 r = mz * mx * my;

  const Vector3 u = point - pose.tail<3>();
  const double n = u.norm();
  const Vector3 w = r.transpose() * u;
  const Vector3 v = w / n;
  const Matrix3 dv_dw = (Matrix3::Identity() - v * v.transpose()) / n;

  const Matrix3 dr_roll = mz * mx * skew(Vector3::UnitY()) * my;
  const Matrix3 dr_pitch = mz * skew(Vector3::UnitX()) * mx * my;
  const Matrix3 dr_yaw = -skew(Vector3::UnitZ()) * r;

  Eigen::Matrix<double, 3, 6> j;
  j.col(0) = dv_dw * (dr_roll.transpose() * u);
  j.col(1) = dv_dw * (dr_pitch.transpose() * u);
  j.col(2) = dv_dw * (dr_yaw.transpose() * u);
  j.rightCols<3>() = -dv_dw * r.transpose();
  return j;
}

double snp_cost(std::span<const Correspondence3d2d> corrs, const PoseVector& pose,
                const SnpOptions& options) {
  const auto obs = bearings(corrs, options);
  return cost_with(corrs, obs, pose);
}

PoseVector to_pose_vector(const OrientationENU& q, const Point3& x) {
  PoseVector p;
  p << q.roll * kDeg, q.pitch * kDeg, q.yaw * kDeg, x;
  return p;
}

PoseEstimate to_estimate(const PoseVector& pose) {
  PoseEstimate e;
  e.orientation = OrientationENU::normalized(pose[0] / kDeg, pose[1] / kDeg, pose[2] / kDeg);
  e.position = pose.tail<3>();
  return e;
}

std::optional<PoseEstimate> solve_snp(std::span<const Correspondence3d2d> corrs,
                                      const OrientationENU& q_prior, double eps_q,
                                      const Point3& x_init, const SnpOptions& options) {
  if (corrs.size() < 3) {
    throw Error(ErrorKind::Validation, "pose solve needs at least 3 correspondences");
  }
  if (!(eps_q >= 0)) throw Error(ErrorKind::Validation, "eps_q must be non-negative");
  const auto obs = bearings(corrs, options);
  const Box box = angle_box(q_prior, eps_q);
  const SolveResult r =
      solve_boxed(corrs, obs, box, to_pose_vector(q_prior, x_init), options.max_iterations);
  if (!r.ok) return std::nullopt;
  PoseEstimate e = to_estimate(r.pose);
  e.inliers = corrs.size();
  e.residual = r.cost;
  return e;
}

std::vector<std::uint8_t> inlier_mask(std::span<const Correspondence3d2d> corrs,
                                      const PoseVector& pose, double threshold,
                                      const SnpOptions& options) {
  const double chord = 2.0 * std::sin(0.5 * threshold);
  const Matrix3 rt = pose_rotation(pose).transpose();
  std::vector<std::uint8_t> mask(corrs.size(), 0);
  for (std::size_t k = 0; k < corrs.size(); ++k) {
    const Vector3 u = corrs[k].point - pose.tail<3>();
    const double len = u.norm();
    if (!(len > 1e-12)) continue;
    const Vector3 b = pixel_to_ray_camera(corrs[k].pixel.x(), corrs[k].pixel.y(), options.width,
                                          options.height);
    mask[k] = (rt * u / len - b).norm() < chord ? 1 : 0;
  }
  return mask;
}

std::optional<PoseEstimate> ransac_snp(std::span<const Correspondence3d2d> corrs,
                                       const OrientationENU& q_prior, double eps_q,
                                       const Point3& x_init, const RansacOptions& ransac,
                                       const SnpOptions& options) {
  if (corrs.size() < 4) {
    throw Error(ErrorKind::Validation, "RANSAC pose solve needs at least 4 correspondences");
  }
  if (ransac.iterations < 1) throw Error(ErrorKind::Validation, "RANSAC needs >= 1 iteration");
  const auto obs = bearings(corrs, options);
  const Box box = angle_box(q_prior, eps_q);
  const PoseVector init = to_pose_vector(q_prior, x_init);
  const double chord = 2.0 * std::sin(0.5 * ransac.inlier_threshold);

  // Samples are drawn up front so the parallel evaluation cannot change them.
  const int iters = ransac.iterations;
  const auto samples = ransac_samples(corrs.size(), ransac);

  std::vector<std::size_t> scores(samples.size(), 0);
  std::vector<PoseVector> poses(samples.size(), init);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < iters; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    const std::array<Correspondence3d2d, 3> sub{corrs[s[0]], corrs[s[1]], corrs[s[2]]};
    const std::array<Vector3, 3> sub_obs{obs[s[0]], obs[s[1]], obs[s[2]]};
    const SolveResult r = solve_boxed(sub, sub_obs, box, init, kHypothesisIterations);
    if (!r.ok) continue;
    poses[static_cast<std::size_t>(i)] = r.pose;
    scores[static_cast<std::size_t>(i)] = count_inliers(corrs, obs, r.pose, chord);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  if (scores[best] < 4) return std::nullopt;
  return ransac_finish(corrs, q_prior, eps_q, poses[best], ransac, options);
}

std::vector<std::array<std::size_t, 3>> ransac_samples(std::size_t n, const RansacOptions& ransac) {
  if (n < 3) throw Error(ErrorKind::Validation, "RANSAC samples need at least 3 correspondences");
  std::vector<std::array<std::size_t, 3>> samples(static_cast<std::size_t>(std::max(ransac.iterations, 0)));
  std::mt19937_64 rng(ransac.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& s : samples) {
    s[0] = pick(rng);
    do s[1] = pick(rng); while (s[1] == s[0]);
    do s[2] = pick(rng); while (s[2] == s[0] || s[2] == s[1]);
  }
  return samples;
}

std::optional<PoseVector> ransac_hypothesis(std::span<const Correspondence3d2d> corrs,
                                            const std::array<std::size_t, 3>& sample,
                                            const OrientationENU& q_prior, double eps_q,
                                            const Point3& x_init, const SnpOptions& options) {
  const std::array<Correspondence3d2d, 3> sub{corrs[sample[0]], corrs[sample[1]], corrs[sample[2]]};
  const auto obs = bearings(sub, options);
  const SolveResult r = solve_boxed(sub, obs, angle_box(q_prior, eps_q),
                                    to_pose_vector(q_prior, x_init), kHypothesisIterations);
  if (!r.ok) return std::nullopt;
  return r.pose;
}

std::size_t count_inliers(std::span<const Correspondence3d2d> corrs, const PoseVector& pose,
                          double threshold, const SnpOptions& options) {
  const auto obs = bearings(corrs, options);
  return count_inliers(corrs, obs, pose, 2.0 * std::sin(0.5 * threshold));
}

std::optional<PoseEstimate> ransac_finish(std::span<const Correspondence3d2d> corrs,
                                          const OrientationENU& q_prior, double eps_q,
                                          const PoseVector& best, const RansacOptions& ransac,
                                          const SnpOptions& options) {
  const auto obs = bearings(corrs, options);
  const double chord = 2.0 * std::sin(0.5 * ransac.inlier_threshold);
  const Matrix3 rt = pose_rotation(best).transpose();
  std::vector<Correspondence3d2d> in;
  std::vector<Vector3> in_obs;
  for (std::size_t k = 0; k < corrs.size(); ++k) {
    const Vector3 u = corrs[k].point - best.tail<3>();
    const double len = u.norm();
    if (len > 1e-12 && (rt * u / len - obs[k]).norm() < chord) {
      in.push_back(corrs[k]);
      in_obs.push_back(obs[k]);
    }
  }
  if (in.size() < 4) return std::nullopt;
  const SolveResult r = solve_boxed(in, in_obs, angle_box(q_prior, eps_q), best, options.max_iterations);
  if (!r.ok) return std::nullopt;
  PoseEstimate e = to_estimate(r.pose);
  e.inliers = in.size();
  e.residual = r.cost;
  return e;
}

double c_image(const Point3& x_candidate, const PoseEstimate& estimate) {
  return (x_candidate - estimate.position).norm();
}

bool confident_positive(double dist, double eps_plus) { return dist <= eps_plus; }

}  // namespace jpil
