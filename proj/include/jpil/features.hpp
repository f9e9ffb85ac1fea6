#pragma once

#include "jpil/spherical.hpp"

#include <memory>
#include <vector>

namespace jpil {

// A 2D-2D correspondence between the real and the synthetic image.
struct PixelMatch {
  Eigen::Vector2d real = Eigen::Vector2d::Zero();
  Eigen::Vector2d synth = Eigen::Vector2d::Zero();
  int distance = 0;
};

class FeatureMatcher {
 public:
  virtual ~FeatureMatcher() = default;
  virtual std::vector<PixelMatch> match(const SphericalImage& real,
                                        const SphericalImage& synth) const = 0;
};

struct OrbParams {
  int max_features = 5000;
  float scale_factor = 1.2f;
  int levels = 8;
  int fast_threshold = 12;
  int max_distance = 64;  // Hamming bound on accepted pairs
};

// Multi-scale FAST corners with rotated BRIEF descriptors, matched as mutual
// nearest neighbours under Hamming distance.
class OrbMatcher final : public FeatureMatcher {
 public:
  explicit OrbMatcher(OrbParams params = {}) : params_(params) {}
  std::vector<PixelMatch> match(const SphericalImage& real,
                                const SphericalImage& synth) const override;

 private:
  OrbParams params_;
};

}  // namespace jpil
