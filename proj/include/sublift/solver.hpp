#pragma once

#include "sublift/dataterm.hpp"
#include "sublift/fields.hpp"
#include "sublift/regularizer.hpp"

namespace sublift {

// First-order primal-dual configuration. sigma/tau of 0 pick the classical
// h/sqrt(8) steps; the product must respect sigma*tau*(8/h^2) <= 1.
struct SolverConfig {
  int max_iters = 20000;
  double tol = 1e-7;
  double sigma = 0.0;
  double tau = 0.0;
  int check_every = 50;
};

struct SaddleSolution {
  LiftedField u;
  DualField q;
  int iters_used = 0;
  double final_residual = 0.0;
  double primal_energy = 0.0;
  bool converged = false;
};

struct ScalarSolution {
  ScalarField u;
  VecField q;
  int iters_used = 0;
  double final_residual = 0.0;
  double primal_energy = 0.0;
  bool converged = false;
};

// Saddle-point solve of min_u sum_x data(u(x)) + max_{q in K} <q, grad u>
// by over-relaxed primal-dual iterations: dual ascent + projection, primal
// prox of the lifted data term, over-relaxation with theta = 1. Stops when
// the relative l2 iterate change over check_every iterations drops below
// tol; a non-converged run returns the last iterate flagged, non-finite
// energies throw SolverError.
SaddleSolution solve_lifted(const LiftedDataTerm& data, const ConstraintSet& set,
                            const PixelGrid& grid, const SaddleSolution* warm,
                            const SolverConfig& cfg);

// Same scheme for the classical ROF model with a linear shift:
// min_u sum lambda/2 (u-f)^2 - p_shift*u + TV_kind(u). The primal prox is
// the closed form (z + tau*(lambda f + p_shift)) / (1 + tau*lambda).
ScalarSolution solve_scalar_rof(const ScalarField& f, double lambda, const ScalarField& p_shift,
                                ConstraintSet::Kind kind, const PixelGrid& grid,
                                const SolverConfig& cfg, const ScalarSolution* warm = nullptr);

// Primal energy of a lifted iterate: shifted envelope plus lifted TV.
double lifted_energy(const LiftedDataTerm& data, const ConstraintSet& set, const PixelGrid& grid,
                     const LiftedField& u);

}  // namespace sublift
