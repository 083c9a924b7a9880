#pragma once

#include "sublift/fields.hpp"
#include "sublift/labels.hpp"

namespace sublift {

// Dual constraint set of the lifted TV: per-row L2 balls (isotropic) or
// per-entry boxes (anisotropic), with radii equal to the interval widths.
struct ConstraintSet {
  enum class Kind { iso, aniso };
  Kind kind = Kind::aniso;
  std::vector<double> radii;

  static ConstraintSet isotropic(const LabelSpace& space) {
    return {Kind::iso, space.widths};
  }
  static ConstraintSet anisotropic(const LabelSpace& space) {
    return {Kind::aniso, space.widths};
  }
};

// Forward differences divided by h, zero at the last row/column.
void grad(const PixelGrid& g, const LiftedField& u, DualField& out);
void grad(const PixelGrid& g, const ScalarField& u, VecField& out);

// Exact adjoint of grad: <q, grad u> = <div_adjoint q, u> for all u.
void div_adjoint(const PixelGrid& g, const DualField& q, LiftedField& out);
void div_adjoint(const PixelGrid& g, const VecField& q, ScalarField& out);

// Euclidean projection onto the constraint set, row by row.
void project_K(DualField& q, const ConstraintSet& set);

// Projection of a scalar-TV dual variable onto the unit ball (L2 or box).
void project_unit(VecField& q, ConstraintSet::Kind kind);

// Closed-form support-function value of the lifted TV.
double lifted_tv(const PixelGrid& g, const LiftedField& u, const ConstraintSet& set);

// Discrete TV of a scalar image, forward differences.
double scalar_tv(const PixelGrid& g, const ScalarField& u, ConstraintSet::Kind kind);

// Serial reference implementations, kept for tests and benchmarks; results
// match the parallel kernels bitwise.
namespace serial {
void grad(const PixelGrid& g, const LiftedField& u, DualField& out);
void grad(const PixelGrid& g, const ScalarField& u, VecField& out);
void div_adjoint(const PixelGrid& g, const DualField& q, LiftedField& out);
void div_adjoint(const PixelGrid& g, const VecField& q, ScalarField& out);
void project_K(DualField& q, const ConstraintSet& set);
double lifted_tv(const PixelGrid& g, const LiftedField& u, const ConstraintSet& set);
}  // namespace serial

}  // namespace sublift
