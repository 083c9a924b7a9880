#include "sublift/bregman.hpp"

#include <cmath>
#include <cstdio>

#include "sublift/parallel.hpp"

namespace sublift {

BregmanState initial_classical_state(const PixelGrid& grid) {
  BregmanState s;
  s.u_scalar = ScalarField(grid.width, grid.height);
  s.p_scalar = ScalarField(grid.width, grid.height);
  return s;
}

BregmanState initial_lifted_state(const PixelGrid& grid, int channels) {
  BregmanState s;
  s.u_lifted = LiftedField(grid.width, grid.height, channels);
  s.p_lifted = LiftedField(grid.width, grid.height, channels);
  return s;
}

BregmanState classical_step(const BregmanState& prev, const ScalarField& f, double lambda,
                            ConstraintSet::Kind kind, const PixelGrid& grid,
                            const SolverConfig& cfg) {
  ScalarSolution warm;
  warm.u = prev.u_scalar;
  warm.q = prev.q_scalar;
  const bool have_warm = prev.k > 0 && !warm.u.v.empty() && !warm.q.v.empty();
  ScalarSolution sol;
  try {
    sol = solve_scalar_rof(f, lambda, prev.p_scalar, kind, grid, cfg,
                           have_warm ? &warm : nullptr);
  } catch (const SolverError& e) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "classical step k=%d: %s", prev.k + 1, e.what());
    throw SolverError(msg);
  }

  BregmanState s;
  s.k = prev.k + 1;
  s.u_scalar = sol.u;
  s.q_scalar = sol.q;
  s.p_scalar = ScalarField(grid.width, grid.height);
  double fid2 = 0.0, data = 0.0;
  for (int p = 0; p < grid.npix(); ++p) {
    const double r = sol.u[p] - f[p];
    s.p_scalar[p] = (prev.p_scalar.v.empty() ? 0.0 : prev.p_scalar[p]) - lambda * r;
    fid2 += r * r;
    data += 0.5 * lambda * r * r;
  }
  s.energies.data = data;
  s.energies.tv = scalar_tv(grid, sol.u, kind);
  s.energies.fidelity = std::sqrt(fid2);
  s.solver_iters = sol.iters_used;
  s.solver_residual = sol.final_residual;
  return s;
}

LiftedField extract_subgradient(const PixelGrid& grid, const SaddleSolution& sol) {
  LiftedField p;
  div_adjoint(grid, sol.q, p);
  return p;
}

TransformResult transform_subgradient(const PixelGrid& grid, const DualField& q,
                                      const LiftedField& u, const LabelSpace& space, double eps) {
  if (!(eps > 0.0)) throw ConfigError("transform_subgradient: eps must be positive");
  const int l = q.channels;
  const int npix = grid.npix();
  TransformResult out;
  out.q_t = DualField(grid.width, grid.height, l);
  VecField s(grid.width, grid.height);  // per-direction scalar dual q_i / widths_i
  std::vector<uint8_t> flagged(npix, 0);

  parallel_for(npix, [&](int p) {
    IntegralityResult r = integrality_check(u.at(p), eps);
    int i;
    if (r.integral) {
      i = r.coord.interval;
    } else {
      flagged[p] = 1;
      const double t =
          std::clamp(project_lifted(space, u.at(p)), space.range_min(), space.range_max());
      i = locate(space, t).interval;
    }
    const double* qi = q.row(p, i);
    double* sp = s.at(p);
    sp[0] = qi[0] / space.widths[i];
    sp[1] = qi[1] / space.widths[i];
    for (int j = 0; j < l; ++j) {
      double* row = out.q_t.row(p, j);
      row[0] = space.widths[j] * sp[0];
      row[1] = space.widths[j] * sp[1];
    }
  });
  div_adjoint(grid, s, out.p_scalar);
  for (uint8_t f : flagged) out.flagged += f;
  return out;
}

BregmanState lifted_step(const BregmanState& prev, const LiftedDataTerm& base_term,
                         const LabelSpace& space, const ConstraintSet& set, const PixelGrid& grid,
                         const SolverConfig& cfg, bool transform, const ScalarField* fidelity_ref,
                         double integrality_eps) {
  const int l = base_term.channels();
  const int npix = grid.npix();

  LiftedDataTerm term = base_term;
  if (prev.k > 0) {
    if (transform)
      term.set_bregman_shift(prev.p_scalar);
    else
      term.set_lifted_shift(prev.p_lifted);
  }

  SaddleSolution warm;
  const bool have_warm = prev.k > 0 && !prev.u_lifted.empty() && !prev.q_dual.empty();
  if (have_warm) {
    warm.u = prev.u_lifted;
    warm.q = prev.q_dual;
  }
  SaddleSolution sol;
  try {
    sol = solve_lifted(term, set, grid, have_warm ? &warm : nullptr, cfg);
  } catch (const SolverError& e) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "lifted step k=%d: %s", prev.k + 1, e.what());
    throw SolverError(msg);
  }

  BregmanState s;
  s.k = prev.k + 1;
  s.u_lifted = sol.u;
  s.q_dual = sol.q;
  s.solver_iters = sol.iters_used;
  s.solver_residual = sol.final_residual;

  std::vector<uint8_t> noninteg(npix, 0);
  s.u_scalar = ScalarField(grid.width, grid.height);
  parallel_for(npix, [&](int p) {
    if (!integrality_check(sol.u.at(p), integrality_eps).integral) noninteg[p] = 1;
    s.u_scalar[p] = project_lifted(space, sol.u.at(p));
  });
  for (uint8_t f : noninteg) s.nonintegral_count += f;
  if (s.nonintegral_count > npix / 5) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "lifted step k=%d: %d of %d pixels are not sublabel-integral", s.k,
                  s.nonintegral_count, npix);
    throw SolverError(msg);
  }

  if (transform) {
    TransformResult tr = transform_subgradient(grid, sol.q, sol.u, space, integrality_eps);
    s.p_scalar = std::move(tr.p_scalar);
    s.p_lifted = LiftedField(grid.width, grid.height, l);
    for (int p = 0; p < npix; ++p) {
      auto row = s.p_lifted.at(p);
      for (int i = 0; i < l; ++i) row[i] = s.p_scalar[p] * space.widths[i];
    }
    s.transform_heuristic = set.kind == ConstraintSet::Kind::iso;
  } else {
    s.p_lifted = extract_subgradient(grid, sol);
  }

  // energies of the unshifted problem
  std::vector<double> data_px(npix);
  parallel_for(npix, [&](int p) { data_px[p] = base_term.envelope(p, sol.u.at(p)); });
  double data = 0.0;
  for (double d : data_px) data += d;
  s.energies.data = data;
  s.energies.tv = lifted_tv(grid, sol.u, set);
  if (fidelity_ref) {
    double fid2 = 0.0;
    for (int p = 0; p < npix; ++p) {
      const double r = s.u_scalar[p] - (*fidelity_ref)[p];
      fid2 += r * r;
    }
    s.energies.fidelity = std::sqrt(fid2);
  }
  return s;
}

std::vector<BregmanState> run_iteration(BregmanMode mode, const BregmanProblem& prob, int K,
                                        const SolverConfig& cfg, bool transform) {
  if (K < 1) throw ConfigError("run_iteration: need at least one step");
  prob.grid.validate();
  std::vector<BregmanState> out;
  out.reserve(K);
  if (mode == BregmanMode::classical) {
    if (prob.f.npix() != prob.grid.npix())
      throw ConfigError("run_iteration: classical mode needs the input image");
    BregmanState state = initial_classical_state(prob.grid);
    for (int k = 0; k < K; ++k) {
      state = classical_step(state, prob.f, prob.lambda, prob.kind, prob.grid, cfg);
      out.push_back(state);
    }
  } else {
    if (!prob.sampler) throw ConfigError("run_iteration: lifted mode needs a cost sampler");
    const LiftedDataTerm base =
        LiftedDataTerm::build(*prob.sampler, prob.grid, prob.space, prob.subsamples);
    const ConstraintSet set = prob.kind == ConstraintSet::Kind::iso
                                  ? ConstraintSet::isotropic(prob.space)
                                  : ConstraintSet::anisotropic(prob.space);
    const ScalarField* fid = prob.use_fidelity_ref ? &prob.f : nullptr;
    BregmanState state = initial_lifted_state(prob.grid, base.channels());
    for (int k = 0; k < K; ++k) {
      state = lifted_step(state, base, prob.space, set, prob.grid, cfg, transform, fid);
      out.push_back(state);
    }
  }
  return out;
}

}  // namespace sublift
