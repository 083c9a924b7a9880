#include "sublift/solver.hpp"

#include <cmath>

#include "sublift/parallel.hpp"

namespace sublift {

namespace {

void resolve_steps(const SolverConfig& cfg, double h, double& sigma, double& tau) {
  sigma = cfg.sigma > 0.0 ? cfg.sigma : h / std::sqrt(8.0);
  tau = cfg.tau > 0.0 ? cfg.tau : h / std::sqrt(8.0);
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0) || cfg.check_every < 1)
    throw ConfigError("SolverConfig: bad iteration parameters");
  if (sigma * tau * 8.0 / (h * h) > 1.0 + 1e-9)
    throw ConfigError("SolverConfig: sigma*tau exceeds the gradient norm bound");
}

double serial_sum(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

}  // namespace

double lifted_energy(const LiftedDataTerm& data, const ConstraintSet& set, const PixelGrid& grid,
                     const LiftedField& u) {
  std::vector<double> per_pixel(grid.npix());
  parallel_for(grid.npix(), [&](int p) { per_pixel[p] = data.envelope(p, u.at(p)); });
  return serial_sum(per_pixel) + lifted_tv(grid, u, set);
}

SaddleSolution solve_lifted(const LiftedDataTerm& data, const ConstraintSet& set,
                            const PixelGrid& grid, const SaddleSolution* warm,
                            const SolverConfig& cfg) {
  grid.validate();
  if (data.npix() != grid.npix()) throw ConfigError("solve_lifted: term/grid shape mismatch");
  const int l = data.channels();
  const int npix = grid.npix();
  double sigma, tau;
  resolve_steps(cfg, grid.h, sigma, tau);

  SaddleSolution sol;
  if (warm && !warm->u.empty()) {
    if (warm->u.npix() != npix || warm->u.channels != l || warm->q.npix() != npix ||
        warm->q.channels != l)
      throw ConfigError("solve_lifted: warm start shape mismatch");
    sol.u = warm->u;
    sol.q = warm->q;
  } else {
    sol.u = LiftedField(grid.width, grid.height, l);
    sol.q = DualField(grid.width, grid.height, l);
  }
  project_K(sol.q, set);

  if (l > 64) throw ConfigError("solve_lifted: more than 64 sublabels is unsupported");
  LiftedField ubar = sol.u, unew(grid.width, grid.height, l), div(grid.width, grid.height, l);
  LiftedField uprev = sol.u;
  DualField gbuf(grid.width, grid.height, l), qprev = sol.q;
  std::vector<ProxScratch> scratch(npix);
  std::vector<double> data_px(npix, 0.0);

  int it = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (it < cfg.max_iters) {
    ++it;
    grad(grid, ubar, gbuf);
    parallel_for(npix, [&](int p) {
      for (int i = 0; i < l; ++i) {
        double* qr = sol.q.row(p, i);
        const double* gr = gbuf.row(p, i);
        qr[0] += sigma * gr[0];
        qr[1] += sigma * gr[1];
        const double r = set.radii[i];
        if (set.kind == ConstraintSet::Kind::aniso) {
          qr[0] = std::clamp(qr[0], -r, r);
          qr[1] = std::clamp(qr[1], -r, r);
        } else {
          const double n = std::sqrt(qr[0] * qr[0] + qr[1] * qr[1]);
          if (n > r) {
            qr[0] *= r / n;
            qr[1] *= r / n;
          }
        }
      }
    });
    div_adjoint(grid, sol.q, div);
    parallel_for(npix, [&](int p) {
      double zloc[64];
      auto up = sol.u.at(p);
      auto dp = div.at(p);
      for (int i = 0; i < l; ++i) zloc[i] = up[i] - tau * dp[i];
      auto np_ = unew.at(p);
      data.prox(p, {zloc, size_t(l)}, tau, np_, scratch[p], &data_px[p]);
      auto bp = ubar.at(p);
      for (int i = 0; i < l; ++i) bp[i] = 2.0 * np_[i] - up[i];
    });
    std::swap(sol.u.v, unew.v);

    if (it % cfg.check_every == 0 || it == cfg.max_iters) {
      // both variables must settle; the primal alone can freeze on a face of
      // the polyhedral energy while the dual is still moving
      double diff2 = 0.0, norm2 = 0.0;
      for (int p = 0; p < npix; ++p) {
        auto a = sol.u.at(p);
        auto b = uprev.at(p);
        for (int i = 0; i < l; ++i) {
          const double d = a[i] - b[i];
          diff2 += d * d;
          norm2 += a[i] * a[i];
        }
      }
      double qdiff2 = 0.0, qnorm2 = 0.0;
      for (size_t i = 0; i < sol.q.v.size(); ++i) {
        const double d = sol.q.v[i] - qprev.v[i];
        qdiff2 += d * d;
        qnorm2 += sol.q.v[i] * sol.q.v[i];
      }
      residual = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-30) +
                 std::sqrt(qdiff2) / std::max(std::sqrt(qnorm2), 1e-30);
      const double energy = serial_sum(data_px) + lifted_tv(grid, sol.u, set);
      if (!std::isfinite(energy)) throw SolverError("solve_lifted: non-finite energy");
      uprev = sol.u;
      qprev = sol.q;
      if (residual < cfg.tol) {
        converged = true;
        break;
      }
    }
  }

  sol.iters_used = it;
  sol.final_residual = residual;
  sol.converged = converged;
  sol.primal_energy = serial_sum(data_px) + lifted_tv(grid, sol.u, set);
  return sol;
}

ScalarSolution solve_scalar_rof(const ScalarField& f, double lambda, const ScalarField& p_shift,
                                ConstraintSet::Kind kind, const PixelGrid& grid,
                                const SolverConfig& cfg, const ScalarSolution* warm) {
  grid.validate();
  if (!(lambda > 0.0)) throw ConfigError("solve_scalar_rof: lambda must be positive");
  const int npix = grid.npix();
  if (f.npix() != npix) throw ConfigError("solve_scalar_rof: image/grid shape mismatch");
  const bool has_shift = !p_shift.v.empty();
  if (has_shift && p_shift.npix() != npix)
    throw ConfigError("solve_scalar_rof: shift shape mismatch");
  double sigma, tau;
  resolve_steps(cfg, grid.h, sigma, tau);

  ScalarSolution sol;
  if (warm && !warm->u.v.empty()) {
    if (warm->u.npix() != npix || warm->q.npix() != npix)
      throw ConfigError("solve_scalar_rof: warm start shape mismatch");
    sol.u = warm->u;
    sol.q = warm->q;
  } else {
    sol.u = f;
    sol.q = VecField(grid.width, grid.height);
  }
  project_unit(sol.q, kind);

  ScalarField ubar = sol.u, uprev = sol.u, div(grid.width, grid.height);
  VecField gbuf(grid.width, grid.height), qprev = sol.q;
  std::vector<double> acc(npix);

  int it = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (it < cfg.max_iters) {
    ++it;
    grad(grid, ubar, gbuf);
    parallel_for(npix, [&](int p) {
      double* qr = sol.q.at(p);
      const double* gr = gbuf.at(p);
      qr[0] += sigma * gr[0];
      qr[1] += sigma * gr[1];
      if (kind == ConstraintSet::Kind::aniso) {
        qr[0] = std::clamp(qr[0], -1.0, 1.0);
        qr[1] = std::clamp(qr[1], -1.0, 1.0);
      } else {
        const double n = std::sqrt(qr[0] * qr[0] + qr[1] * qr[1]);
        if (n > 1.0) {
          qr[0] /= n;
          qr[1] /= n;
        }
      }
    });
    div_adjoint(grid, sol.q, div);
    parallel_for(npix, [&](int p) {
      const double z = sol.u[p] - tau * div[p];
      const double shift = has_shift ? p_shift[p] : 0.0;
      const double un = (z + tau * (lambda * f[p] + shift)) / (1.0 + tau * lambda);
      ubar[p] = 2.0 * un - sol.u[p];
      acc[p] = un;
    });
    for (int p = 0; p < npix; ++p) sol.u[p] = acc[p];

    if (it % cfg.check_every == 0 || it == cfg.max_iters) {
      double diff2 = 0.0, norm2 = 0.0;
      for (int p = 0; p < npix; ++p) {
        const double d = sol.u[p] - uprev[p];
        diff2 += d * d;
        norm2 += sol.u[p] * sol.u[p];
      }
      double qdiff2 = 0.0, qnorm2 = 0.0;
      for (size_t i = 0; i < sol.q.v.size(); ++i) {
        const double d = sol.q.v[i] - qprev.v[i];
        qdiff2 += d * d;
        qnorm2 += sol.q.v[i] * sol.q.v[i];
      }
      residual = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-30) +
                 std::sqrt(qdiff2) / std::max(std::sqrt(qnorm2), 1e-30);
      double data = 0.0;
      for (int p = 0; p < npix; ++p) {
        const double r = sol.u[p] - f[p];
        data += 0.5 * lambda * r * r - (has_shift ? p_shift[p] * sol.u[p] : 0.0);
      }
      const double energy = data + scalar_tv(grid, sol.u, kind);
      if (!std::isfinite(energy)) throw SolverError("solve_scalar_rof: non-finite energy");
      uprev = sol.u;
      qprev = sol.q;
      if (residual < cfg.tol) {
        converged = true;
        break;
      }
    }
  }

  double data = 0.0;
  for (int p = 0; p < npix; ++p) {
    const double r = sol.u[p] - f[p];
    data += 0.5 * lambda * r * r - (has_shift ? p_shift[p] * sol.u[p] : 0.0);
  }
  sol.primal_energy = data + scalar_tv(grid, sol.u, kind);
  sol.iters_used = it;
  sol.final_residual = residual;
  sol.converged = converged;
  return sol;
}

}  // namespace sublift
