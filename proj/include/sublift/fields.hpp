#pragma once

#include <span>
#include <vector>

#include "sublift/errors.hpp"

namespace sublift {

// 2-D pixel grid with spacing h. Pixels are indexed row-major, p = y*width + x.
struct PixelGrid {
  int width = 0;
  int height = 0;
  double h = 1.0;

  int npix() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  void validate() const {
    if (width < 1 || height < 1) throw ConfigError("PixelGrid: empty grid");
    if (!(h > 0.0)) throw ConfigError("PixelGrid: spacing must be positive");
  }
};

// Scalar value per pixel (image, subgradient field, ...).
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  ScalarField() = default;
  ScalarField(int w, int h, double fill = 0.0) : width(w), height(h), v(size_t(w) * h, fill) {}

  int npix() const { return width * height; }
  double& at(int x, int y) { return v[size_t(y) * width + x]; }
  double at(int x, int y) const { return v[size_t(y) * width + x]; }
  double& operator[](size_t p) { return v[p]; }
  double operator[](size_t p) const { return v[p]; }
};

// Two components per pixel (dual variable of scalar TV, image gradients).
// Layout: v[p*2 + dir], dir 0 = x, dir 1 = y.
struct VecField {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  VecField() = default;
  VecField(int w, int h) : width(w), height(h), v(size_t(w) * h * 2, 0.0) {}

  int npix() const { return width * height; }
  double* at(int p) { return v.data() + size_t(p) * 2; }
  const double* at(int p) const { return v.data() + size_t(p) * 2; }
};

// One vector in R^l per pixel. Layout: v[(p*l) + i].
struct LiftedField {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> v;

  LiftedField() = default;
  LiftedField(int w, int h, int l, double fill = 0.0)
      : width(w), height(h), channels(l), v(size_t(w) * h * l, fill) {}

  int npix() const { return width * height; }
  std::span<double> at(int p) { return {v.data() + size_t(p) * channels, size_t(channels)}; }
  std::span<const double> at(int p) const {
    return {v.data() + size_t(p) * channels, size_t(channels)};
  }
  bool empty() const { return v.empty(); }
};

// One l-by-2 matrix per pixel (TV dual variable).
// Layout: v[((p*l) + i)*2 + dir]; row i pairs with lifted channel i.
struct DualField {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> v;

  DualField() = default;
  DualField(int w, int h, int l) : width(w), height(h), channels(l), v(size_t(w) * h * l * 2, 0.0) {}

  int npix() const { return width * height; }
  double* row(int p, int i) { return v.data() + (size_t(p) * channels + i) * 2; }
  const double* row(int p, int i) const { return v.data() + (size_t(p) * channels + i) * 2; }
  bool empty() const { return v.empty(); }
};

}  // namespace sublift
