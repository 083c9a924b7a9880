#pragma once

#include <span>
#include <vector>

#include "sublift/fields.hpp"
#include "sublift/labels.hpp"
#include "sublift/regularizer.hpp"

namespace sublift {
namespace oracle {

// Brute-force convex envelope of a small set of support points. Used by
// tests as ground truth; deliberately independent of LiftedDataTerm.
struct EnvelopeOracle {
  int dim = 0;                              // <= 3
  std::vector<std::vector<double>> points;  // <= 16 points
  std::vector<double> costs;
};

// min { sum lambda_j c_j : sum lambda_j s_j = u, lambda in simplex } by
// enumerating all affinely independent subsets of <= dim+1 points
// (Caratheodory) and solving each small system; +inf if u is infeasible.
double envelope_value(const EnvelopeOracle& o, std::span<const double> u);

// Exhaustive minimizer of tau*envelope(u) + 0.5*||u - z||^2 over the
// monotone box discretized at grid_step (dim <= 2). Returns the best grid
// point.
std::vector<double> prox_oracle(const EnvelopeOracle& o, std::span<const double> z, double tau,
                                double grid_step);

// A complete lifted instance small enough to minimize by grid search:
// per-pixel support-point costs plus a lifted TV with the given widths.
struct TinyLiftedProblem {
  PixelGrid grid;                          // at most 2x2 pixels
  LabelSpace space;                        // at most 2 sublabels
  std::vector<EnvelopeOracle> pixel_cost;  // one oracle per pixel
  ConstraintSet::Kind kind = ConstraintSet::Kind::aniso;
};

struct TinyMinimum {
  LiftedField u;
  double energy = 0.0;
};

// Global grid minimum of data + lifted TV over per-pixel monotone-box
// points. refine_rounds > 0 shrinks the grid around the incumbent; the
// objective is convex, so refinement cannot lose the global minimum.
TinyMinimum exhaustive_min(const TinyLiftedProblem& prob, double grid_step, int refine_rounds = 0);

}  // namespace oracle
}  // namespace sublift
