#include "jpil/features.hpp"

#include <opencv2/core.hpp>
#include <opencv2/features2d.hpp>

namespace jpil {

namespace {

cv::Mat view(const SphericalImage& gray) {
  return {gray.height, gray.width, CV_8UC1, const_cast<std::uint8_t*>(gray.pixels.data())};
}

}  // namespace

std::vector<PixelMatch> OrbMatcher::match(const SphericalImage& real,
                                          const SphericalImage& synth) const {
  const SphericalImage real_gray = real.to_gray();
  const SphericalImage synth_gray = synth.to_gray();
  auto orb = cv::ORB::create(params_.max_features, params_.scale_factor, params_.levels, 31, 0, 2,
                             cv::ORB::HARRIS_SCORE, 31, params_.fast_threshold);
  std::vector<cv::KeyPoint> kp_real;
  std::vector<cv::KeyPoint> kp_synth;
  cv::Mat desc_real;
  cv::Mat desc_synth;
  orb->detectAndCompute(view(real_gray), cv::noArray(), kp_real, desc_real);
  orb->detectAndCompute(view(synth_gray), cv::noArray(), kp_synth, desc_synth);
  if (desc_real.empty() || desc_synth.empty()) return {};

  // Cross-checked brute force is exactly mutual nearest neighbours.
  cv::BFMatcher matcher(cv::NORM_HAMMING, true);
  std::vector<cv::DMatch> raw;
  matcher.match(desc_real, desc_synth, raw);

  std::vector<PixelMatch> out;
  out.reserve(raw.size());
  for (const cv::DMatch& m : raw) {
    if (m.distance > static_cast<float>(params_.max_distance)) continue;
    const cv::Point2f& a = kp_real[static_cast<std::size_t>(m.queryIdx)].pt;
    const cv::Point2f& b = kp_synth[static_cast<std::size_t>(m.trainIdx)].pt;
    out.push_back({{a.x, a.y}, {b.x, b.y}, static_cast<int>(m.distance)});
  }
  return out;
}

}  // namespace jpil
