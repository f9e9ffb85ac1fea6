#include "jpil/pipeline.hpp"
#include "jpil/error.hpp"
#include "jpil/mesh_io.hpp"

#include <cstring>
#include <fstream>
#include <iostream>

namespace jpil {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

template <typename T>
void fnv_value(std::uint64_t& h, const T& v) {
  fnv(h, &v, sizeof v);
}

constexpr char kCacheMagic[8] = {'J', 'P', 'I', 'L', 'R', 'E', 'F', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

std::uint64_t JpilConfig::reference_hash() const {
  std::uint64_t h = kFnvOffset;
  fnv_value(h, sample_density);
  fnv_value(h, seed);
  fnv_value(h, keypoints.r_scale);
  fnv_value(h, keypoints.k_ratio);
  fnv_value(h, keypoints.min_curvature);
  fnv_value(h, tbsc.n_r);
  fnv_value(h, tbsc.n_a);
  fnv_value(h, desc_radius);
  return h;
}

void JpilConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::Validation, what);
  };
  require(sample_density > 0, "sample_density must be positive");
  require(keypoints.r_scale > 0, "r_scale must be positive");
  require(keypoints.k_ratio > 0 && keypoints.k_ratio < 1, "k_ratio must lie in (0, 1)");
  require(tbsc.n_r > 0 && tbsc.n_a > 0, "n_r and n_a must be positive");
  require(desc_radius > 0, "desc_radius must be positive");
  require(eps_desc > 0 && eps_desc <= 1, "eps_desc must lie in (0, 1]");
  require(cluster.eps_clust > 0, "eps_clust must be positive");
  require(cluster.min_cluster >= 3, "min_cluster must be at least 3");
  require(render.width > 0 && render.width == 2 * render.height, "render width must be 2 x height");
  require(sigma_kernel >= 1, "sigma_kernel must be >= 1");
  require(eps_sigma > 0, "eps_sigma must be positive");
  require(eps_q > 0, "eps_q must be positive");
  require(eps_plus > 0, "eps_plus must be positive");
  require(ransac.iterations > 0, "ransac_iters must be positive");
  require(ransac.inlier_threshold > 0, "ransac_thresh must be positive");
}

std::uint64_t mesh_hash(const TriangleMesh& mesh) {
  std::uint64_t h = kFnvOffset;
  const std::uint64_t nv = mesh.vertices.size();
  const std::uint64_t nt = mesh.triangles.size();
  fnv_value(h, nv);
  fnv_value(h, nt);
  for (const Point3& v : mesh.vertices) fnv(h, v.data(), 3 * sizeof(double));
  for (const Triangle& t : mesh.triangles) fnv(h, t.data(), 3 * sizeof(std::uint32_t));
  return h;
}

KeypointSet describe(const PointCloud& cloud, const JpilConfig& cfg) {
  KeypointSet set;
  set.keypoints = detect_keypoints(cloud, cfg.keypoints);
  set.descriptors = compute_tbsc_batch(cloud, set.keypoints, cfg.desc_radius, cfg.tbsc);
  return set;
}

ReferenceModel::ReferenceModel(TriangleMesh mesh, std::uint64_t key)
    : bvh_(std::move(mesh)), key_(key) {}

ReferenceModel::ReferenceModel(TriangleMesh mesh, const JpilConfig& cfg)
    : bvh_(std::move(mesh)) {
  cfg.validate();
  if (this->mesh().empty()) throw Error(ErrorKind::Validation, "reference mesh is empty");
  key_ = mesh_hash(this->mesh()) ^ cfg.reference_hash();
  cloud_ = sample_mesh(this->mesh(), cfg.sample_density, cfg.seed);
  features_ = describe(cloud_, cfg);
}

std::shared_ptr<const ReferenceModel> ReferenceModel::prepare(TriangleMesh mesh,
                                                              const JpilConfig& cfg,
                                                              const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return std::make_shared<const ReferenceModel>(std::move(mesh), cfg);
  cfg.validate();
  if (mesh.empty()) throw Error(ErrorKind::Validation, "reference mesh is empty");
  const std::uint64_t key = mesh_hash(mesh) ^ cfg.reference_hash();
  char name[32];
  std::snprintf(name, sizeof name, "ref-%016llx.bin", static_cast<unsigned long long>(key));
  const std::filesystem::path file = cache_dir / name;

  std::shared_ptr<ReferenceModel> cached(new ReferenceModel(mesh, key));
  if (cached->load(file)) return cached;

  auto built = std::make_shared<const ReferenceModel>(std::move(mesh), cfg);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  try {
    built->save(file);
  } catch (const Error& e) {
    std::cerr << "warning: reference cache not written: " << e.what() << "\n";
  }
  return built;
}

void ReferenceModel::save(const std::filesystem::path& file) const {
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::Internal, "cannot write " + tmp.string());
    out.write(kCacheMagic, sizeof kCacheMagic);
    put(out, key_);
    put(out, static_cast<std::uint64_t>(cloud_.size()));
    for (const Point3& p : cloud_.points) out.write(reinterpret_cast<const char*>(p.data()), 24);
    put(out, static_cast<std::uint64_t>(features_.size()));
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const OrientedKeypoint& kp = features_.keypoints[i];
      const EigenFeatures& f = kp.features;
      put(out, kp.index);
      out.write(reinterpret_cast<const char*>(f.lambda3d.data()), 3 * sizeof(double));
      out.write(reinterpret_cast<const char*>(f.evecs3d.data()), 9 * sizeof(double));
      out.write(reinterpret_cast<const char*>(f.lambda2d.data()), 2 * sizeof(double));
      out.write(reinterpret_cast<const char*>(f.evecs2d.data()), 4 * sizeof(double));
      put(out, f.curvature);
      const TbscDescriptor& d = features_.descriptors[i];
      put(out, static_cast<std::uint64_t>(d.bits));
      put(out, d.radius);
      put(out, static_cast<std::uint8_t>(d.low_support));
      for (std::uint64_t w : d.words) put(out, w);
    }
    if (!out) throw Error(ErrorKind::Internal, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

bool ReferenceModel::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  char magic[8];
  std::uint64_t key = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) return false;
  if (!get(in, key) || key != key_) return false;
  std::uint64_t n = 0;
  if (!get(in, n)) return false;
  PointCloud cloud;
  cloud.points.resize(n);
  for (Point3& p : cloud.points) {
    if (!in.read(reinterpret_cast<char*>(p.data()), 24)) return false;
  }
  std::uint64_t nk = 0;
  if (!get(in, nk)) return false;
  KeypointSet set;
  set.keypoints.resize(nk);
  set.descriptors.resize(nk);
  for (std::uint64_t i = 0; i < nk; ++i) {
    OrientedKeypoint& kp = set.keypoints[i];
    EigenFeatures& f = kp.features;
    if (!get(in, kp.index) || kp.index >= n) return false;
    kp.position = cloud.points[kp.index];
    in.read(reinterpret_cast<char*>(f.lambda3d.data()), 3 * sizeof(double));
    in.read(reinterpret_cast<char*>(f.evecs3d.data()), 9 * sizeof(double));
    in.read(reinterpret_cast<char*>(f.lambda2d.data()), 2 * sizeof(double));
    in.read(reinterpret_cast<char*>(f.evecs2d.data()), 4 * sizeof(double));
    get(in, f.curvature);
    TbscDescriptor& d = set.descriptors[i];
    std::uint64_t bits = 0;
    std::uint8_t low = 0;
    get(in, bits);
    get(in, d.radius);
    if (!get(in, low) || bits > (1u << 20)) return false;
    d.bits = bits;
    d.low_support = low != 0;
    d.words.resize((bits + 63) / 64);
    for (std::uint64_t& w : d.words) get(in, w);
    if (!in) return false;
  }
  cloud_ = std::move(cloud);
  features_ = std::move(set);
  from_cache_ = true;
  return true;
}

void LocalizationRequest::validate() const {
  if (session_mesh.empty()) throw Error(ErrorKind::Validation, "session mesh is empty");
  if (!image.has_valid_aspect()) {
    throw Error(ErrorKind::Validation, "spherical image must be 2:1, got " +
                                           std::to_string(image.width) + "x" +
                                           std::to_string(image.height));
  }
  if (std::abs(state.gaze.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::Validation, "gaze must be a unit vector");
  }
  if (!state.position.allFinite()) throw Error(ErrorKind::Validation, "headset position not finite");
}

const char* to_string(Gate gate) {
  return gate == Gate::ConfidentPositive ? "confident-positive" : "fallback-min-cost";
}

std::vector<Candidate> session_candidates(const ReferenceModel& ref, const TriangleMesh& session,
                                          const JpilConfig& cfg) {
  const PointCloud cloud = sample_mesh(session, cfg.sample_density, cfg.seed + 1);
  const KeypointSet features = describe(cloud, cfg);
  const std::vector<Match> matches = match_descriptors(features, ref.features(), cfg.eps_desc);
  const AlignCostFn cost = [&](const RigidTransform& a) {
    return align_cost(a, ref.cloud(), cloud, cfg.tbsc);
  };
  return find_reg_candidates(matches, cfg.cluster, cost);
}

void check_candidate(const ReferenceModel& ref, const LocalizationRequest& req,
                     const Point3& x_cand, const JpilConfig& cfg, const FeatureMatcher& matcher,
                     CandidateReport& rep) {
  RenderParams rp = cfg.render;
  rp.width = req.image.width;
  rp.height = req.image.height;
  SnpOptions snp;
  snp.width = rp.width;
  snp.height = rp.height;
  SphericalRender synth = render_spherical(ref.bvh(), x_cand, req.state.orientation, rp);
  synth.sigma = sigma_map(synth, cfg.sigma_kernel);
  const auto corrs = build_correspondences(req.image, synth, cfg.eps_sigma, matcher);
  rep.evaluated = true;
  rep.correspondences = corrs.size();
  rep.estimate.reset();
  rep.c_image = std::numeric_limits<double>::infinity();
  rep.confident = false;
  if (corrs.size() < 4) return;
  rep.estimate = ransac_snp(corrs, req.state.orientation, cfg.eps_q, x_cand, cfg.ransac, snp);
  if (!rep.estimate) return;
  rep.c_image = c_image(x_cand, *rep.estimate);
  rep.confident = confident_positive(rep.c_image, cfg.eps_plus);
}

LocalizationResult jpil(const ReferenceModel& ref, const LocalizationRequest& req,
                        const JpilConfig& cfg, const FeatureMatcher& matcher) {
  cfg.validate();
  req.validate();
  const std::vector<Candidate> candidates = session_candidates(ref, req.session_mesh, cfg);
  if (candidates.empty()) {
    throw Error(ErrorKind::NoRegistration, "no registration candidate for the session map");
  }

  LocalizationResult result;
  result.candidate_count = candidates.size();
  result.candidates.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    CandidateReport rep;
    rep.transform = c.transform;
    rep.align_cost = c.align_cost;
    rep.matches = c.matches.size();
    result.candidates.push_back(rep);
  }

  // Candidates arrive in ascending cost order, so index 0 is the argmin and
  // the first confident positive is the cheapest one that passes.
  std::size_t chosen = 0;
  bool gated = false;
  if (cfg.image_gate) {
    for (std::size_t j = 0; j < candidates.size() && !gated; ++j) {
      CandidateReport& rep = result.candidates[j];
      check_candidate(ref, req, candidates[j].transform.apply(req.state.position), cfg, matcher, rep);
      if (rep.confident) {
        chosen = j;
        gated = true;
      }
    }
  }

  result.chosen = chosen;
  result.gate = gated ? Gate::ConfidentPositive : Gate::FallbackMinCost;
  result.transform = candidates[chosen].transform;
  result.headset_position_ref = result.transform.apply(req.state.position);
  return result;
}

LocalizationResult jpil(const ReferenceModel& ref, const LocalizationRequest& req,
                        const JpilConfig& cfg) {
  return jpil(ref, req, cfg, OrbMatcher(cfg.orb));
}

std::optional<Point3> measure_point(const LocalizationResult& result, const Bvh& reference,
                                    const HeadsetState& state) {
  const Point3 origin = result.transform.apply(state.position);
  const Vector3 dir = result.transform.rotation * state.gaze;
  return raycast(reference, origin, dir);
}

std::optional<Point3> measure_point(const LocalizationResult& result,
                                    const TriangleMesh& reference, const HeadsetState& state) {
  return measure_point(result, Bvh(reference), state);
}

}  // namespace jpil
