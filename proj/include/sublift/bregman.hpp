#pragma once

#include <vector>

#include "sublift/dataterm.hpp"
#include "sublift/fields.hpp"
#include "sublift/labels.hpp"
#include "sublift/regularizer.hpp"
#include "sublift/solver.hpp"

namespace sublift {

struct EnergyRecord {
  double data = 0.0;
  double tv = 0.0;
  double fidelity = 0.0;
};

// One step of either iteration. At k = 0 all subgradient fields are zero;
// lifted states carry the saddle dual for warm starts, classical states the
// scalar dual.
struct BregmanState {
  int k = 0;
  ScalarField u_scalar;  // classical iterate, or projected lifted iterate
  ScalarField p_scalar;  // scalar subgradient (classical or transformed)
  VecField q_scalar;     // classical TV dual (warm start)
  LiftedField u_lifted;
  LiftedField p_lifted;  // lifted subgradient div_adjoint(q)
  DualField q_dual;
  EnergyRecord energies;
  int nonintegral_count = 0;
  int solver_iters = 0;
  double solver_residual = 0.0;
  bool transform_heuristic = false;  // transform applied under isotropic TV
};

BregmanState initial_classical_state(const PixelGrid& grid);
BregmanState initial_lifted_state(const PixelGrid& grid, int channels);

// Classical ROF Bregman step: solve with the previous subgradient as linear
// shift, then p_k = p_{k-1} - lambda*(u_k - f).
BregmanState classical_step(const BregmanState& prev, const ScalarField& f, double lambda,
                            ConstraintSet::Kind kind, const PixelGrid& grid,
                            const SolverConfig& cfg);

// div_adjoint of the dual maximizer, a subgradient of the lifted TV.
LiftedField extract_subgradient(const PixelGrid& grid, const SaddleSolution& sol);

struct TransformResult {
  DualField q_t;
  ScalarField p_scalar;
  int flagged = 0;  // pixels that needed rounding before the transform
};

// Per-pixel rewrite of a dual maximizer into the structured form: every row
// becomes (widths_j / widths_i) * q_i where i is the active interval of u.
// The result stays feasible and satisfies div_adjoint(q_t) = p_scalar*widths.
TransformResult transform_subgradient(const PixelGrid& grid, const DualField& q,
                                      const LiftedField& u, const LabelSpace& space, double eps);

// Lifted Bregman step. base_term must carry zero shift; the step applies the
// previous subgradient (p_scalar*widths when transform is on, the raw lifted
// p otherwise), solves, extracts and optionally transforms the new
// subgradient, and records the projected iterate plus diagnostics.
// Throws SolverError when more than 20% of pixels are non-integral.
BregmanState lifted_step(const BregmanState& prev, const LiftedDataTerm& base_term,
                         const LabelSpace& space, const ConstraintSet& set, const PixelGrid& grid,
                         const SolverConfig& cfg, bool transform,
                         const ScalarField* fidelity_ref = nullptr,
                         double integrality_eps = 1e-3);

enum class BregmanMode { classical, lifted };

struct BregmanProblem {
  PixelGrid grid;
  ConstraintSet::Kind kind = ConstraintSet::Kind::aniso;
  // classical mode (and fidelity reference for lifted ROF runs)
  ScalarField f;
  double lambda = 0.0;
  // lifted mode
  LabelSpace space;
  const CostSampler* sampler = nullptr;
  int subsamples = 16;
  bool use_fidelity_ref = false;
};

// K Bregman steps with full per-step diagnostics; deterministic given the
// problem description.
std::vector<BregmanState> run_iteration(BregmanMode mode, const BregmanProblem& prob, int K,
                                        const SolverConfig& cfg, bool transform);

}  // namespace sublift
