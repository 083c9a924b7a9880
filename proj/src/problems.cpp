#include "sublift/problems.hpp"

#include <algorithm>
#include <cmath>

#include "sublift/parallel.hpp"
#include "sublift/regularizer.hpp"

namespace sublift {

namespace {

// linear interpolation along a row with replicated boundary
double sample_row(const ScalarField& img, int y, double x) {
  const double xc = std::clamp(x, 0.0, double(img.width - 1));
  const int x0 = int(xc);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const double a = xc - x0;
  return (1.0 - a) * img.at(x0, y) + a * img.at(x1, y);
}

double sample_row_dir(const VecField& g, int y, double x, int dir, int width) {
  const double xc = std::clamp(x, 0.0, double(width - 1));
  const int x0 = int(xc);
  const int x1 = std::min(x0 + 1, width - 1);
  const double a = xc - x0;
  return (1.0 - a) * g.at(y * width + x0)[dir] + a * g.at(y * width + x1)[dir];
}

bool inside(const Shape& s, double x, double y) {
  if (s.kind == Shape::Kind::disc) {
    const double dx = x - s.cx, dy = y - s.cy;
    return dx * dx + dy * dy <= s.radius * s.radius;
  }
  return std::max(std::fabs(x - s.cx), std::fabs(y - s.cy)) <= s.radius;
}

void check_disjoint(const SyntheticScene& scene) {
  for (size_t a = 0; a < scene.shapes.size(); ++a)
    for (size_t b = a + 1; b < scene.shapes.size(); ++b) {
      const Shape &s = scene.shapes[a], &t = scene.shapes[b];
      if (std::fabs(s.cx - t.cx) <= s.radius + t.radius &&
          std::fabs(s.cy - t.cy) <= s.radius + t.radius)
        throw ConfigError("SyntheticScene: overlapping shapes");
    }
}

// SplitMix64 hash of lattice coordinates; stable across platforms.
uint64_t hash3(uint64_t seed, int64_t x, int64_t y) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (uint64_t(x) * 2654435761ULL + uint64_t(y) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double lattice_noise(uint64_t seed, int64_t x, int64_t y) {
  return double(hash3(seed, x, y) >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0;  // [-1,1)
}

// band-limited value noise: two bilinear octaves on coarse lattices
double texture(uint64_t seed, double x, double y) {
  double acc = 0.0;
  const double scales[2] = {6.0, 3.0};
  const double amps[2] = {0.7, 0.3};
  for (int o = 0; o < 2; ++o) {
    const double fx = x / scales[o], fy = y / scales[o];
    const int64_t x0 = int64_t(std::floor(fx)), y0 = int64_t(std::floor(fy));
    const double ax = fx - double(x0), ay = fy - double(y0);
    const double n00 = lattice_noise(seed + o, x0, y0);
    const double n10 = lattice_noise(seed + o, x0 + 1, y0);
    const double n01 = lattice_noise(seed + o, x0, y0 + 1);
    const double n11 = lattice_noise(seed + o, x0 + 1, y0 + 1);
    acc += amps[o] * ((1 - ax) * (1 - ay) * n00 + ax * (1 - ay) * n10 + (1 - ax) * ay * n01 +
                      ax * ay * n11);
  }
  return 0.5 + 0.35 * acc;  // stays well inside [0,1]
}

}  // namespace

RofSampler::RofSampler(ScalarField f, double lambda) : f_(std::move(f)), lambda_(lambda) {
  if (!(lambda > 0.0)) throw ConfigError("rof_sampler: lambda must be positive");
}

double RofSampler::cost(int pix, double t) const {
  const double r = t - f_[pix];
  return 0.5 * lambda_ * r * r;
}

StereoSimpleSampler::StereoSimpleSampler(StereoPair pair, double tau_thresh, double weight)
    : pair_(std::move(pair)), tau_(tau_thresh), weight_(weight) {
  if (!(tau_ > 0.0)) throw ConfigError("stereo_simple_sampler: tau must be positive");
  if (pair_.I1.width != pair_.I2.width || pair_.I1.height != pair_.I2.height)
    throw ConfigError("stereo_simple_sampler: image shapes differ");
}

double StereoSimpleSampler::cost(int pix, double t) const {
  const int x = pix % pair_.I2.width, y = pix / pair_.I2.width;
  const double v = sample_row(pair_.I1, y, double(x) + t);
  return weight_ * std::min(tau_, std::fabs(v - pair_.I2[pix]));
}

StereoPatchSampler::StereoPatchSampler(StereoPair pair, double tau_thresh, int patch_radius,
                                       double weight)
    : width_(pair.I1.width),
      height_(pair.I1.height),
      radius_(patch_radius),
      tau_(tau_thresh),
      weight_(weight) {
  if (!(tau_ > 0.0)) throw ConfigError("stereo_patch_sampler: tau must be positive");
  if (patch_radius < 0) throw ConfigError("stereo_patch_sampler: negative patch radius");
  if (pair.I1.width != pair.I2.width || pair.I1.height != pair.I2.height)
    throw ConfigError("stereo_patch_sampler: image shapes differ");
  PixelGrid g{width_, height_, 1.0};
  grad(g, pair.I1, g1_);
  grad(g, pair.I2, g2_);
}

double StereoPatchSampler::cost(int pix, double t) const {
  const int x = pix % width_, y = pix / width_;
  double acc = 0.0;
  for (int dy = -radius_; dy <= radius_; ++dy) {
    const int yy = std::clamp(y + dy, 0, height_ - 1);
    for (int dx = -radius_; dx <= radius_; ++dx) {
      const int xx = std::clamp(x + dx, 0, width_ - 1);
      for (int dir = 0; dir < 2; ++dir) {
        const double a = sample_row_dir(g1_, yy, double(xx) + t, dir, width_);
        const double b = g2_.at(yy * width_ + xx)[dir];
        acc += std::min(tau_, std::fabs(a - b));
      }
    }
  }
  return weight_ * acc;
}

ScalarField make_scene_image(const SyntheticScene& scene, const PixelGrid& grid) {
  grid.validate();
  check_disjoint(scene);
  ScalarField img(grid.width, grid.height, scene.background);
  for (int p = 0; p < grid.npix(); ++p) {
    const double x = p % grid.width, y = p / grid.width;
    for (const Shape& s : scene.shapes)
      if (inside(s, x, y)) img[p] = scene.background + s.height;
  }
  return img;
}

StereoPair make_stereo_pair(const SyntheticScene& scene, const PixelGrid& grid, int shift,
                            uint64_t texture_seed) {
  grid.validate();
  if (shift < 0) throw ConfigError("make_stereo_pair: shift must be >= 0");
  check_disjoint(scene);
  StereoPair pair;
  pair.I1 = ScalarField(grid.width, grid.height);
  pair.I2 = ScalarField(grid.width, grid.height);
  parallel_for(grid.npix(), [&](int p) {
    const int x = p % grid.width, y = p / grid.width;
    pair.I2[p] = texture(texture_seed, x, y);
    bool in = false;
    for (const Shape& s : scene.shapes) in = in || inside(s, x, y);
    pair.I1[p] = in ? texture(texture_seed, double(x) - shift, y) : pair.I2[p];
  });
  return pair;
}

}  // namespace sublift
