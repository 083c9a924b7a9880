#include "sublift/regularizer.hpp"

#include <cmath>

#include "sublift/parallel.hpp"

namespace sublift {

namespace {

inline void check_lifted_shape(const PixelGrid& g, const LiftedField& u) {
  if (u.width != g.width || u.height != g.height)
    throw ConfigError("regularizer: field/grid shape mismatch");
}

// Per-pixel bodies shared by the parallel and serial entry points.

inline void grad_px(const PixelGrid& g, const LiftedField& u, DualField& out, int p) {
  const int x = p % g.width, y = p / g.width;
  const double inv_h = 1.0 / g.h;
  const int l = u.channels;
  const auto up = u.at(p);
  const double* ux = x + 1 < g.width ? u.at(p + 1).data() : nullptr;
  const double* uy = y + 1 < g.height ? u.at(p + g.width).data() : nullptr;
  for (int i = 0; i < l; ++i) {
    double* row = out.row(p, i);
    row[0] = ux ? (ux[i] - up[i]) * inv_h : 0.0;
    row[1] = uy ? (uy[i] - up[i]) * inv_h : 0.0;
  }
}

inline void div_adjoint_px(const PixelGrid& g, const DualField& q, LiftedField& out, int p) {
  const int x = p % g.width, y = p / g.width;
  const double inv_h = 1.0 / g.h;
  const int l = q.channels;
  auto op = out.at(p);
  for (int i = 0; i < l; ++i) {
    double a = 0.0;
    if (x + 1 < g.width) a -= q.row(p, i)[0];
    if (x > 0) a += q.row(p - 1, i)[0];
    if (y + 1 < g.height) a -= q.row(p, i)[1];
    if (y > 0) a += q.row(p - g.width, i)[1];
    op[i] = a * inv_h;
  }
}

inline void project_px(DualField& q, const ConstraintSet& set, int p) {
  const int l = q.channels;
  for (int i = 0; i < l; ++i) {
    double* row = q.row(p, i);
    const double r = set.radii[i];
    if (set.kind == ConstraintSet::Kind::aniso) {
      for (int d = 0; d < 2; ++d) {
        if (row[d] > r)
          row[d] = r;
        else if (row[d] < -r)
          row[d] = -r;
      }
    } else {
      const double n = std::sqrt(row[0] * row[0] + row[1] * row[1]);
      if (n > r) {
        const double s = r / n;
        row[0] *= s;
        row[1] *= s;
      }
    }
  }
}

inline double lifted_tv_px(const PixelGrid& g, const LiftedField& u, const ConstraintSet& set,
                           int p) {
  const int x = p % g.width, y = p / g.width;
  const double inv_h = 1.0 / g.h;
  const int l = u.channels;
  const auto up = u.at(p);
  const double* ux = x + 1 < g.width ? u.at(p + 1).data() : nullptr;
  const double* uy = y + 1 < g.height ? u.at(p + g.width).data() : nullptr;
  double acc = 0.0;
  for (int i = 0; i < l; ++i) {
    const double gx = ux ? (ux[i] - up[i]) * inv_h : 0.0;
    const double gy = uy ? (uy[i] - up[i]) * inv_h : 0.0;
    if (set.kind == ConstraintSet::Kind::aniso)
      acc += set.radii[i] * (std::fabs(gx) + std::fabs(gy));
    else
      acc += set.radii[i] * std::sqrt(gx * gx + gy * gy);
  }
  return acc;
}

template <class Loop>
double lifted_tv_impl(const PixelGrid& g, const LiftedField& u, const ConstraintSet& set,
                      Loop&& loop) {
  check_lifted_shape(g, u);
  std::vector<double> per_pixel(g.npix());
  loop(g.npix(), [&](int p) { per_pixel[p] = lifted_tv_px(g, u, set, p); });
  double total = 0.0;  // serial sum keeps the result thread-count independent
  for (double t : per_pixel) total += t;
  return total;
}

}  // namespace

void grad(const PixelGrid& g, const LiftedField& u, DualField& out) {
  check_lifted_shape(g, u);
  if (out.width != g.width || out.height != g.height || out.channels != u.channels)
    out = DualField(g.width, g.height, u.channels);
  parallel_for(g.npix(), [&](int p) { grad_px(g, u, out, p); });
}

void grad(const PixelGrid& g, const ScalarField& u, VecField& out) {
  if (out.width != g.width || out.height != g.height) out = VecField(g.width, g.height);
  parallel_for(g.npix(), [&](int p) {
    const int x = p % g.width, y = p / g.width;
    double* o = out.at(p);
    o[0] = x + 1 < g.width ? (u[p + 1] - u[p]) / g.h : 0.0;
    o[1] = y + 1 < g.height ? (u[p + g.width] - u[p]) / g.h : 0.0;
  });
}

void div_adjoint(const PixelGrid& g, const DualField& q, LiftedField& out) {
  if (out.width != g.width || out.height != g.height || out.channels != q.channels)
    out = LiftedField(g.width, g.height, q.channels);
  parallel_for(g.npix(), [&](int p) { div_adjoint_px(g, q, out, p); });
}

void div_adjoint(const PixelGrid& g, const VecField& q, ScalarField& out) {
  if (out.width != g.width || out.height != g.height) out = ScalarField(g.width, g.height);
  parallel_for(g.npix(), [&](int p) {
    const int x = p % g.width, y = p / g.width;
    double a = 0.0;
    if (x + 1 < g.width) a -= q.at(p)[0];
    if (x > 0) a += q.at(p - 1)[0];
    if (y + 1 < g.height) a -= q.at(p)[1];
    if (y > 0) a += q.at(p - g.width)[1];
    out[p] = a / g.h;
  });
}

void project_K(DualField& q, const ConstraintSet& set) {
  if (int(set.radii.size()) != q.channels)
    throw ConfigError("project_K: radii/channel mismatch");
  parallel_for(q.npix(), [&](int p) { project_px(q, set, p); });
}

void project_unit(VecField& q, ConstraintSet::Kind kind) {
  parallel_for(q.npix(), [&](int p) {
    double* row = q.at(p);
    if (kind == ConstraintSet::Kind::aniso) {
      for (int d = 0; d < 2; ++d) row[d] = std::clamp(row[d], -1.0, 1.0);
    } else {
      const double n = std::sqrt(row[0] * row[0] + row[1] * row[1]);
      if (n > 1.0) {
        row[0] /= n;
        row[1] /= n;
      }
    }
  });
}

double lifted_tv(const PixelGrid& g, const LiftedField& u, const ConstraintSet& set) {
  return lifted_tv_impl(g, u, set, [](int n, auto&& f) { parallel_for(n, f); });
}

double scalar_tv(const PixelGrid& g, const ScalarField& u, ConstraintSet::Kind kind) {
  std::vector<double> per_pixel(g.npix());
  parallel_for(g.npix(), [&](int p) {
    const int x = p % g.width, y = p / g.width;
    const double gx = x + 1 < g.width ? (u[p + 1] - u[p]) / g.h : 0.0;
    const double gy = y + 1 < g.height ? (u[p + g.width] - u[p]) / g.h : 0.0;
    per_pixel[p] = kind == ConstraintSet::Kind::aniso ? std::fabs(gx) + std::fabs(gy)
                                                      : std::sqrt(gx * gx + gy * gy);
  });
  double total = 0.0;
  for (double t : per_pixel) total += t;
  return total;
}

namespace serial {

void grad(const PixelGrid& g, const LiftedField& u, DualField& out) {
  check_lifted_shape(g, u);
  if (out.width != g.width || out.height != g.height || out.channels != u.channels)
    out = DualField(g.width, g.height, u.channels);
  serial_for(g.npix(), [&](int p) { grad_px(g, u, out, p); });
}

void grad(const PixelGrid& g, const ScalarField& u, VecField& out) {
  if (out.width != g.width || out.height != g.height) out = VecField(g.width, g.height);
  serial_for(g.npix(), [&](int p) {
    const int x = p % g.width, y = p / g.width;
    double* o = out.at(p);
    o[0] = x + 1 < g.width ? (u[p + 1] - u[p]) / g.h : 0.0;
    o[1] = y + 1 < g.height ? (u[p + g.width] - u[p]) / g.h : 0.0;
  });
}

void div_adjoint(const PixelGrid& g, const DualField& q, LiftedField& out) {
  if (out.width != g.width || out.height != g.height || out.channels != q.channels)
    out = LiftedField(g.width, g.height, q.channels);
  serial_for(g.npix(), [&](int p) { div_adjoint_px(g, q, out, p); });
}

void div_adjoint(const PixelGrid& g, const VecField& q, ScalarField& out) {
  if (out.width != g.width || out.height != g.height) out = ScalarField(g.width, g.height);
  serial_for(g.npix(), [&](int p) {
    const int x = p % g.width, y = p / g.width;
    double a = 0.0;
    if (x + 1 < g.width) a -= q.at(p)[0];
    if (x > 0) a += q.at(p - 1)[0];
    if (y + 1 < g.height) a -= q.at(p)[1];
    if (y > 0) a += q.at(p - g.width)[1];
    out[p] = a / g.h;
  });
}

void project_K(DualField& q, const ConstraintSet& set) {
  if (int(set.radii.size()) != q.channels)
    throw ConfigError("project_K: radii/channel mismatch");
  serial_for(q.npix(), [&](int p) { project_px(q, set, p); });
}

double lifted_tv(const PixelGrid& g, const LiftedField& u, const ConstraintSet& set) {
  return lifted_tv_impl(g, u, set, [](int n, auto&& f) { serial_for(n, f); });
}

}  // namespace serial

}  // namespace sublift
