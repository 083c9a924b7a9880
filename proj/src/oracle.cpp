#include "sublift/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sublift {
namespace oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool invert_small(int n, std::vector<double>& a) {
  std::vector<double> inv(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[size_t(i) * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[size_t(r) * n + col]) > std::fabs(a[size_t(piv) * n + col])) piv = r;
    if (std::fabs(a[size_t(piv) * n + col]) < 1e-12) return false;
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a[size_t(piv) * n + c], a[size_t(col) * n + c]);
        std::swap(inv[size_t(piv) * n + c], inv[size_t(col) * n + c]);
      }
    const double d = a[size_t(col) * n + col];
    for (int c = 0; c < n; ++c) {
      a[size_t(col) * n + c] /= d;
      inv[size_t(col) * n + c] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[size_t(r) * n + col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[size_t(r) * n + c] -= f * a[size_t(col) * n + c];
        inv[size_t(r) * n + c] -= f * inv[size_t(col) * n + c];
      }
    }
  }
  a = std::move(inv);
  return true;
}

// One affinely independent subset: amat = [points; 1] column-major by
// subset member, pinv maps [u; 1] to barycentric weights.
struct Simplex {
  std::vector<int> members;
  std::vector<double> amat;  // (dim+1) x r
  std::vector<double> pinv;  // r x (dim+1)
  double cost_floor = 0.0;
};

struct EnvelopeCache {
  int dim = 0;
  int rows = 0;  // dim + 1
  std::vector<Simplex> simplices;
  const EnvelopeOracle* oracle = nullptr;
};

void add_subset(EnvelopeCache& cache, const std::vector<int>& members) {
  const EnvelopeOracle& o = *cache.oracle;
  const int rows = cache.rows;
  const int r = int(members.size());
  Simplex s;
  s.members = members;
  s.amat.assign(size_t(rows) * r, 0.0);
  for (int j = 0; j < r; ++j) {
    for (int d = 0; d < o.dim; ++d) s.amat[size_t(d) * r + j] = o.points[members[j]][d];
    s.amat[size_t(o.dim) * r + j] = 1.0;
  }
  // pinv = (A^T A)^-1 A^T
  std::vector<double> gram(size_t(r) * r, 0.0);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      double acc = 0.0;
      for (int d = 0; d < rows; ++d) acc += s.amat[size_t(d) * r + a] * s.amat[size_t(d) * r + b];
      gram[size_t(a) * r + b] = acc;
    }
  if (!invert_small(r, gram)) return;  // affinely dependent subset; skip
  s.pinv.assign(size_t(r) * rows, 0.0);
  for (int a = 0; a < r; ++a)
    for (int d = 0; d < rows; ++d) {
      double acc = 0.0;
      for (int b = 0; b < r; ++b) acc += gram[size_t(a) * r + b] * s.amat[size_t(d) * r + b];
      s.pinv[size_t(a) * rows + d] = acc;
    }
  s.cost_floor = kInf;
  for (int j : members) s.cost_floor = std::min(s.cost_floor, o.costs[j]);
  cache.simplices.push_back(std::move(s));
}

EnvelopeCache build_cache(const EnvelopeOracle& o) {
  if (o.dim < 1 || o.dim > 3) throw ConfigError("EnvelopeOracle: dim must be in 1..3");
  if (o.points.size() > 16 || o.points.empty())
    throw ConfigError("EnvelopeOracle: need 1..16 points");
  if (o.points.size() != o.costs.size()) throw ConfigError("EnvelopeOracle: points/costs mismatch");
  for (auto& p : o.points)
    if (int(p.size()) != o.dim) throw ConfigError("EnvelopeOracle: point dimension mismatch");

  EnvelopeCache cache;
  cache.dim = o.dim;
  cache.rows = o.dim + 1;
  cache.oracle = &o;
  const int n = int(o.points.size());
  const int maxr = std::min(n, o.dim + 1);
  std::vector<int> members;
  // enumerate all subsets of size 1..dim+1
  auto rec = [&](auto&& self, int start) -> void {
    if (!members.empty()) add_subset(cache, members);
    if (int(members.size()) == maxr) return;
    for (int j = start; j < n; ++j) {
      members.push_back(j);
      self(self, j + 1);
      members.pop_back();
    }
  };
  rec(rec, 0);
  return cache;
}

double eval_cached(const EnvelopeCache& cache, std::span<const double> u, double tol) {
  const EnvelopeOracle& o = *cache.oracle;
  const int rows = cache.rows;
  double rhs[4];
  for (int d = 0; d < o.dim; ++d) rhs[d] = u[d];
  rhs[o.dim] = 1.0;
  double best = kInf;
  double lam[4], res[4];
  for (const Simplex& s : cache.simplices) {
    if (s.cost_floor >= best) continue;
    const int r = int(s.members.size());
    double value = 0.0;
    bool feasible = true;
    for (int a = 0; a < r; ++a) {
      double acc = 0.0;
      for (int d = 0; d < rows; ++d) acc += s.pinv[size_t(a) * rows + d] * rhs[d];
      lam[a] = acc;
      if (acc < -1e-10) {
        feasible = false;
        break;
      }
      value += acc * o.costs[s.members[a]];
    }
    if (!feasible || value >= best) continue;
    for (int d = 0; d < rows; ++d) {
      double acc = -rhs[d];
      for (int a = 0; a < r; ++a) acc += s.amat[size_t(d) * r + a] * lam[a];
      res[d] = acc;
    }
    double rn = 0.0;
    for (int d = 0; d < rows; ++d) rn = std::max(rn, std::fabs(res[d]));
    if (rn <= tol) best = value;
  }
  return best;
}

}  // namespace

double envelope_value(const EnvelopeOracle& o, std::span<const double> u) {
  if (int(u.size()) != o.dim) throw ConfigError("envelope_value: dimension mismatch");
  const EnvelopeCache cache = build_cache(o);
  double un = 0.0;
  for (int d = 0; d < o.dim; ++d) un = std::max(un, std::fabs(u[d]));
  return eval_cached(cache, u, 1e-9 * (1.0 + un));
}

std::vector<double> prox_oracle(const EnvelopeOracle& o, std::span<const double> z, double tau,
                                double grid_step) {
  if (o.dim > 2) throw ConfigError("prox_oracle: dim must be <= 2");
  if (!(tau > 0.0) || !(grid_step > 0.0)) throw ConfigError("prox_oracle: bad parameters");
  const EnvelopeCache cache = build_cache(o);
  const int N = std::max(1, int(std::lround(1.0 / grid_step)));
  const double tol = 1e-9;

  double best = kInf;
  std::vector<double> arg(o.dim, 0.0), u(o.dim, 0.0);
  if (o.dim == 1) {
    for (int j = 0; j <= N; ++j) {
      u[0] = double(j) / N;
      const double e = eval_cached(cache, u, tol);
      if (e == kInf) continue;
      const double obj = tau * e + 0.5 * (u[0] - z[0]) * (u[0] - z[0]);
      if (obj < best) {
        best = obj;
        arg = u;
      }
    }
  } else {
    for (int j1 = 0; j1 <= N; ++j1) {
      u[0] = double(j1) / N;
      for (int j2 = 0; j2 <= j1; ++j2) {
        u[1] = double(j2) / N;
        const double e = eval_cached(cache, u, tol);
        if (e == kInf) continue;
        const double d0 = u[0] - z[0], d1 = u[1] - z[1];
        const double obj = tau * e + 0.5 * (d0 * d0 + d1 * d1);
        if (obj < best) {
          best = obj;
          arg = u;
        }
      }
    }
  }
  return arg;
}

namespace {

// lifted TV of a candidate assignment, forward differences, Neumann
double tiny_tv(const TinyLiftedProblem& prob, const std::vector<std::vector<double>>& u) {
  const int w = prob.grid.width, h = prob.grid.height;
  const int l = prob.space.sublabel_count();
  const double inv_h = 1.0 / prob.grid.h;
  double acc = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int p = y * w + x;
      for (int i = 0; i < l; ++i) {
        const double gx = x + 1 < w ? (u[p + 1][i] - u[p][i]) * inv_h : 0.0;
        const double gy = y + 1 < h ? (u[p + w][i] - u[p][i]) * inv_h : 0.0;
        if (prob.kind == ConstraintSet::Kind::aniso)
          acc += prob.space.widths[i] * (std::fabs(gx) + std::fabs(gy));
        else
          acc += prob.space.widths[i] * std::sqrt(gx * gx + gy * gy);
      }
    }
  return acc;
}

std::vector<std::vector<double>> box_points(int dim, double lo0, double hi0, double lo1,
                                            double hi1, double step) {
  std::vector<std::vector<double>> pts;
  const int n0 = std::max(1, int(std::lround((hi0 - lo0) / step)));
  if (dim == 1) {
    for (int j = 0; j <= n0; ++j) pts.push_back({lo0 + (hi0 - lo0) * double(j) / n0});
  } else {
    const int n1 = std::max(1, int(std::lround((hi1 - lo1) / step)));
    for (int j0 = 0; j0 <= n0; ++j0) {
      const double a = lo0 + (hi0 - lo0) * double(j0) / n0;
      for (int j1 = 0; j1 <= n1; ++j1) {
        const double b = lo1 + (hi1 - lo1) * double(j1) / n1;
        if (b <= a + 1e-12) pts.push_back({a, b});
      }
    }
  }
  return pts;
}

}  // namespace

TinyMinimum exhaustive_min(const TinyLiftedProblem& prob, double grid_step, int refine_rounds) {
  const int npix = prob.grid.npix();
  const int l = prob.space.sublabel_count();
  if (npix > 4 || prob.grid.width > 2 || prob.grid.height > 2 || l > 2)
    throw ConfigError("exhaustive_min: instance exceeds the 2x2 / l<=2 caps");
  if (int(prob.pixel_cost.size()) != npix)
    throw ConfigError("exhaustive_min: one cost oracle per pixel required");

  std::vector<EnvelopeCache> caches;
  caches.reserve(npix);
  for (const auto& o : prob.pixel_cost) caches.push_back(build_cache(o));

  std::vector<std::vector<double>> best(npix, std::vector<double>(l, 0.0));
  double best_energy = kInf;
  double step = grid_step;
  std::vector<double> lo0(npix, 0.0), hi0(npix, 1.0), lo1(npix, 0.0), hi1(npix, 1.0);

  for (int round = 0; round <= refine_rounds; ++round) {
    // candidate lists and envelope values per pixel
    std::vector<std::vector<std::vector<double>>> cand(npix);
    std::vector<std::vector<double>> env(npix);
    for (int p = 0; p < npix; ++p) {
      cand[p] = box_points(l, lo0[p], hi0[p], lo1[p], hi1[p], step);
      env[p].resize(cand[p].size());
      for (size_t j = 0; j < cand[p].size(); ++j)
        env[p][j] = eval_cached(caches[p], cand[p][j], 1e-9);
    }
    std::vector<std::vector<double>> cur(npix);
    std::vector<int> pick(npix, 0);
    double round_best = kInf;
    std::vector<std::vector<double>> round_arg = best;
    auto rec = [&](auto&& self, int p, double data_acc) -> void {
      if (p == npix) {
        const double e = data_acc + tiny_tv(prob, cur);
        if (e < round_best) {
          round_best = e;
          round_arg = cur;
        }
        return;
      }
      for (size_t j = 0; j < cand[p].size(); ++j) {
        if (env[p][j] == kInf) continue;
        cur[p] = cand[p][j];
        self(self, p + 1, data_acc + env[p][j]);
      }
    };
    rec(rec, 0, 0.0);
    if (round_best < best_energy) {
      best_energy = round_best;
      best = round_arg;
    }
    // shrink the search boxes around the incumbent
    for (int p = 0; p < npix; ++p) {
      lo0[p] = std::max(0.0, best[p][0] - 2.0 * step);
      hi0[p] = std::min(1.0, best[p][0] + 2.0 * step);
      if (l == 2) {
        lo1[p] = std::max(0.0, best[p][1] - 2.0 * step);
        hi1[p] = std::min(1.0, best[p][1] + 2.0 * step);
      }
    }
    step /= 10.0;
  }

  TinyMinimum out;
  out.u = LiftedField(prob.grid.width, prob.grid.height, l);
  for (int p = 0; p < npix; ++p)
    for (int i = 0; i < l; ++i) out.u.at(p)[i] = best[p][i];
  out.energy = best_energy;
  return out;
}

}  // namespace oracle
}  // namespace sublift
