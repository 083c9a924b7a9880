#pragma once

#include <cstdint>
#include <memory>

#include "sublift/dataterm.hpp"
#include "sublift/fields.hpp"

namespace sublift {

struct StereoPair {
  ScalarField I1, I2;  // grayscale in [0,1], same shape; disparity shifts columns
};

struct Shape {
  enum class Kind { disc, square };
  Kind kind = Kind::disc;
  double cx = 0.0, cy = 0.0;  // center in pixels
  double radius = 0.0;        // disc radius or square half-side
  double height = 0.0;
};

struct SyntheticScene {
  std::vector<Shape> shapes;  // pairwise disjoint bounding boxes
  double background = 0.0;
};

// rho(x,t) = lambda/2 (t - f(x))^2
class RofSampler final : public CostSampler {
 public:
  RofSampler(ScalarField f, double lambda);
  double cost(int pix, double t) const override;

 private:
  ScalarField f_;
  double lambda_;
};

// rho(x,t) = weight * min(tau, |I1(x1, x2 + t) - I2(x)|), columns of I1
// sampled with linear interpolation and replicated boundary.
class StereoSimpleSampler final : public CostSampler {
 public:
  StereoSimpleSampler(StereoPair pair, double tau_thresh, double weight = 1.0);
  double cost(int pix, double t) const override;

 private:
  StereoPair pair_;
  double tau_, weight_;
};

// Patch data term: truncated absolute gradient differences summed over a
// (2r+1)^2 window, forward-difference image gradients, replicate boundary.
class StereoPatchSampler final : public CostSampler {
 public:
  StereoPatchSampler(StereoPair pair, double tau_thresh, int patch_radius, double weight = 1.0);
  double cost(int pix, double t) const override;

 private:
  VecField g1_, g2_;
  int width_ = 0, height_ = 0, radius_ = 0;
  double tau_, weight_;
};

// Rasterizes the scene: background outside, background + height inside;
// discs by center distance, squares by max-coordinate. Overlapping shapes
// are a ConfigError.
ScalarField make_scene_image(const SyntheticScene& scene, const PixelGrid& grid);

// Deterministic textured pair: identical seeded noise backgrounds; inside
// each shape the texture of I1 is displaced by `shift` columns while the
// shape outline stays in place, so the induced disparity is `shift` inside
// shapes and 0 outside.
StereoPair make_stereo_pair(const SyntheticScene& scene, const PixelGrid& grid, int shift,
                            uint64_t texture_seed);

}  // namespace sublift
