#include "sublift/dataterm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sublift/parallel.hpp"

namespace sublift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gaussian elimination with partial pivoting, in place. A is n x n row-major.
bool solve_dense(int n, double* A, double* b) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(A[r * n + col]) > std::fabs(A[piv * n + col])) piv = r;
    if (std::fabs(A[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double d = A[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = A[r * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * b[c];
    b[r] = s / A[r * n + r];
  }
  return true;
}

}  // namespace

double LiftedDataTerm::shifted_cost(int pix, int k) const {
  // c - <b, s_k> with <b, s_k> = sum_{j<i} b_j + alpha*b_i
  const SublabelCoord c = point_coord(k);
  const double* b = shift_.data() + size_t(pix) * l_;
  double dot = 0.0;
  for (int j = 0; j < c.interval; ++j) dot += b[j];
  dot += c.alpha * b[c.interval];
  return costs_[size_t(pix) * n_ + k] - dot;
}

void LiftedDataTerm::point_vector(int k, std::span<double> out) const {
  const SublabelCoord c = point_coord(k);
  for (int j = 0; j < c.interval; ++j) out[j] = 1.0;
  out[c.interval] = c.alpha;
  for (int j = c.interval + 1; j < l_; ++j) out[j] = 0.0;
}

double LiftedDataTerm::point_dot(int ka, int kb) const {
  SublabelCoord a = point_coord(ka), b = point_coord(kb);
  if (a.interval > b.interval) std::swap(a, b);
  if (a.interval < b.interval) return double(a.interval) + a.alpha;
  return double(a.interval) + a.alpha * b.alpha;
}

LiftedDataTerm LiftedDataTerm::build(const CostSampler& sampler, const PixelGrid& grid,
                                     const LabelSpace& space, int subsamples) {
  if (subsamples < 1) throw ConfigError("LiftedDataTerm: subsamples must be >= 1");
  grid.validate();

  LiftedDataTerm t;
  t.space_ = space;
  t.M_ = subsamples;
  t.l_ = space.sublabel_count();
  t.n_ = t.l_ * t.M_ + 1;
  t.npix_ = grid.npix();
  t.ts_.resize(t.n_);
  t.alphas_.resize(t.n_);
  for (int k = 0; k < t.n_; ++k) {
    const int i = k == t.n_ - 1 ? t.l_ - 1 : k / t.M_;
    const int m = k - i * t.M_;
    t.alphas_[k] = double(m) / double(t.M_);
    t.ts_[k] = space.labels[i] + t.alphas_[k] * space.widths[i];
  }

  const size_t hull_stride = size_t(t.M_) + 1;
  t.costs_.assign(size_t(t.npix_) * t.n_, 0.0);
  t.hull_idx_.assign(size_t(t.npix_) * t.l_ * hull_stride, 0);
  t.hull_cnt_.assign(size_t(t.npix_) * t.l_, 0);
  t.hull_slope_.assign(size_t(t.npix_) * t.l_ * hull_stride, 0.0);
  t.hull_alpha_.assign(size_t(t.npix_) * t.l_ * hull_stride, 0.0);
  t.shift_.assign(size_t(t.npix_) * t.l_, 0.0);

  std::vector<uint8_t> bad(t.npix_, 0);
  parallel_for(t.npix_, [&](int p) {
    double* c = t.costs_.data() + size_t(p) * t.n_;
    bool any_finite = false;
    for (int k = 0; k < t.n_; ++k) {
      c[k] = sampler.cost(p, t.ts_[k]);
      if (std::isnan(c[k]) || c[k] == -kInf) {
        bad[p] = 1;
        return;
      }
      any_finite = any_finite || std::isfinite(c[k]);
    }
    if (!any_finite) {
      bad[p] = 2;
      return;
    }
    for (int i = 0; i < t.l_; ++i) {
      int32_t* idx = t.hull_idx_.data() + (size_t(p) * t.l_ + i) * hull_stride;
      double* hal = t.hull_alpha_.data() + (size_t(p) * t.l_ + i) * hull_stride;
      int cnt = 0;
      for (int m = 0; m <= t.M_; ++m) {
        const int k = i * t.M_ + m;
        if (!std::isfinite(c[k])) continue;
        const double ax = double(m) / double(t.M_);
        while (cnt >= 2) {
          const double x1 = hal[cnt - 2], y1 = c[idx[cnt - 2]];
          const double x2 = hal[cnt - 1], y2 = c[idx[cnt - 1]];
          if ((x2 - x1) * (c[k] - y1) - (y2 - y1) * (ax - x1) <= 0.0)
            --cnt;
          else
            break;
        }
        idx[cnt] = k;
        hal[cnt] = ax;
        ++cnt;
      }
      t.hull_cnt_[size_t(p) * t.l_ + i] = cnt;
      double* slp = t.hull_slope_.data() + (size_t(p) * t.l_ + i) * hull_stride;
      for (int s = 0; s + 1 < cnt; ++s)
        slp[s] = (c[idx[s + 1]] - c[idx[s]]) / (hal[s + 1] - hal[s]);
    }
  });
  for (int p = 0; p < t.npix_; ++p) {
    if (bad[p]) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "LiftedDataTerm: %s cost at pixel %d",
                    bad[p] == 1 ? "invalid (NaN or -inf)" : "no finite", p);
      throw ConfigError(msg);
    }
  }
  return t;
}

void LiftedDataTerm::set_bregman_shift(const ScalarField& p) {
  if (p.npix() != npix_) throw ConfigError("set_bregman_shift: field shape mismatch");
  for (int px = 0; px < npix_; ++px) {
    if (!std::isfinite(p[px])) throw ConfigError("set_bregman_shift: non-finite value");
    double* b = shift_.data() + size_t(px) * l_;
    for (int i = 0; i < l_; ++i) b[i] = p[px] * space_.widths[i];
  }
}

void LiftedDataTerm::set_lifted_shift(const LiftedField& b) {
  if (b.npix() != npix_ || b.channels != l_)
    throw ConfigError("set_lifted_shift: field shape mismatch");
  for (double x : b.v)
    if (!std::isfinite(x)) throw ConfigError("set_lifted_shift: non-finite value");
  std::copy(b.v.begin(), b.v.end(), shift_.begin());
}

void LiftedDataTerm::clear_shift() { std::fill(shift_.begin(), shift_.end(), 0.0); }

LiftedDataTerm::ConjResult LiftedDataTerm::conjugate_max(int pix,
                                                         std::span<const double> v) const {
  const double* b = shift_.data() + size_t(pix) * l_;
  const double* c = costs_.data() + size_t(pix) * n_;
  ConjResult best;
  double pref = 0.0;
  for (int i = 0; i < l_; ++i) {
    const double yi = v[i] + b[i];
    const int cnt = hull_count(pix, i);
    if (cnt > 0) {
      const int32_t* idx = hull_idx(pix, i);
      const double* slp = hull_slope(pix, i);
      const double* hal = hull_alpha_.data() + (size_t(pix) * l_ + i) * (M_ + 1);
      int lo = 0, hi = cnt - 1;
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (slp[mid] < yi)
          lo = mid + 1;
        else
          hi = mid;
      }
      const double val = pref + hal[lo] * yi - c[idx[lo]];
      if (val > best.val) {
        best.val = val;
        best.k = idx[lo];
      }
    }
    pref += yi;
  }
  return best;
}

double LiftedDataTerm::conjugate(int pix, std::span<const double> v) const {
  return conjugate_max(pix, v).val;
}

// Fully corrective Frank-Wolfe on the support-point weights: the candidate
// vertex comes from the conjugate, the correction step solves the equality
// QP on the active set with nonnegativity handled by stepping and dropping.
// Finishes with scratch.u holding the minimizer; returns the relative
// primal-dual gap.
double LiftedDataTerm::solve_qp(int pix, std::span<const double> z, double tau,
                                ProxScratch& s) const {
  const int maxA = l_ + 6;
  auto& A = s.active;
  auto& w = s.weight;
  s.u.assign(l_, 0.0);
  s.y.assign(l_, 0.0);

  // prefix sums of z for <s_k, z>
  std::vector<double>& zp = s.rhs;
  zp.assign(l_ + 1, 0.0);
  for (int i = 0; i < l_; ++i) zp[i + 1] = zp[i] + z[i];
  auto dot_z = [&](int k) {
    const SublabelCoord c = point_coord(k);
    return zp[c.interval] + c.alpha * z[c.interval];
  };

  bool valid = !A.empty() && A.size() == w.size();
  for (size_t j = 0; j < A.size() && valid; ++j) valid = A[j] >= 0 && A[j] < n_;
  if (!valid) {
    for (int i = 0; i < l_; ++i) s.y[i] = z[i] / tau;
    ConjResult seed = conjugate_max(pix, s.y);
    A.assign(1, seed.k);
    w.assign(1, 1.0);
  }

  auto rebuild_u = [&]() {
    std::fill(s.u.begin(), s.u.end(), 0.0);
    for (size_t j = 0; j < A.size(); ++j) {
      const SublabelCoord c = point_coord(A[j]);
      for (int i = 0; i < c.interval; ++i) s.u[i] += w[j];
      s.u[c.interval] += w[j] * c.alpha;
    }
  };

  double gap_rel = kInf;
  int stall = 0;
  for (int it = 0; it < 300; ++it) {
    rebuild_u();
    for (int i = 0; i < l_; ++i) s.y[i] = (z[i] - s.u[i]) / tau;
    const ConjResult fw = conjugate_max(pix, s.y);
    double ctl = 0.0, uv = 0.0;
    for (size_t j = 0; j < A.size(); ++j) ctl += w[j] * shifted_cost(pix, A[j]);
    for (int i = 0; i < l_; ++i) uv += s.u[i] * s.y[i];
    const double scale = 1.0 + std::fabs(ctl) + std::fabs(fw.val) + std::fabs(uv);
    gap_rel = (ctl + fw.val - uv) / scale;
    if (gap_rel <= 1e-12) return gap_rel;

    bool already = false;
    for (int a : A) already = already || a == fw.k;
    if (already) {
      if (++stall > 2) return gap_rel;
    } else {
      if (int(A.size()) >= maxA) {
        size_t drop = 0;
        for (size_t j = 1; j < w.size(); ++j)
          if (w[j] < w[drop]) drop = j;
        A.erase(A.begin() + drop);
        w.erase(w.begin() + drop);
      }
      A.push_back(fw.k);
      w.push_back(0.0);
    }

    // correction: exact minimization over the simplex spanned by A
    for (int minor = 0; minor < 40; ++minor) {
      const int r = int(A.size());
      const int m = r + 1;
      s.kkt.assign(size_t(m) * m, 0.0);
      s.sol.assign(m, 0.0);
      double trace = 0.0;
      for (int a = 0; a < r; ++a) {
        for (int bb = 0; bb < r; ++bb) s.kkt[size_t(a) * m + bb] = point_dot(A[a], A[bb]);
        trace += s.kkt[size_t(a) * m + a];
        s.kkt[size_t(a) * m + r] = 1.0;
        s.kkt[size_t(r) * m + a] = 1.0;
        s.sol[a] = dot_z(A[a]) - tau * shifted_cost(pix, A[a]);
      }
      const double ridge = 1e-13 * (1.0 + trace);
      for (int a = 0; a < r; ++a) s.kkt[size_t(a) * m + a] += ridge;
      s.sol[r] = 1.0;
      std::vector<double> mat = s.kkt;
      if (!solve_dense(m, mat.data(), s.sol.data())) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "prox_data: singular correction system at pixel %d", pix);
        throw SolverError(msg);
      }
      double ymin = 0.0;
      for (int a = 0; a < r; ++a) ymin = std::min(ymin, s.sol[a]);
      if (ymin >= -1e-12) {
        for (int a = 0; a < r; ++a) w[a] = std::max(s.sol[a], 0.0);
        for (int a = r - 1; a >= 0; --a) {
          if (w[a] <= 1e-14 && int(A.size()) > 1) {
            A.erase(A.begin() + a);
            w.erase(w.begin() + a);
          }
        }
        break;
      }
      // step toward y until the first weight hits zero, then drop it
      double theta = 1.0;
      int block = -1;
      for (int a = 0; a < r; ++a) {
        if (s.sol[a] < 0.0 && w[a] - s.sol[a] > 0.0) {
          const double th = w[a] / (w[a] - s.sol[a]);
          if (th < theta) {
            theta = th;
            block = a;
          }
        }
      }
      for (int a = 0; a < r; ++a) w[a] += theta * (s.sol[a] - w[a]);
      if (block >= 0 && int(A.size()) > 1) {
        A.erase(A.begin() + block);
        w.erase(w.begin() + block);
      } else {
        break;
      }
    }
  }
  rebuild_u();
  return gap_rel;
}

void LiftedDataTerm::prox(int pix, std::span<const double> z, double tau, std::span<double> out,
                          ProxScratch& scratch, double* env_value) const {
  if (!(tau > 0.0)) throw ConfigError("prox_data: tau must be positive");
  const double gap = solve_qp(pix, z, tau, scratch);
  if (!(gap <= 1e-6)) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "prox_data: inner solver stalled at pixel %d (gap %.3e)", pix,
                  gap);
    throw SolverError(msg);
  }
  std::copy(scratch.u.begin(), scratch.u.end(), out.begin());
  if (env_value) {
    double v = 0.0;
    for (size_t j = 0; j < scratch.active.size(); ++j)
      v += scratch.weight[j] * shifted_cost(pix, scratch.active[j]);
    *env_value = v;
  }
}

std::vector<double> LiftedDataTerm::prox(int pix, std::span<const double> z, double tau) const {
  ProxScratch scratch;
  std::vector<double> out(l_);
  prox(pix, z, tau, out, scratch);
  return out;
}

double LiftedDataTerm::envelope(int pix, std::span<const double> u) const {
  const double box_tol = 1e-9;
  if (u[0] > 1.0 + box_tol || u[l_ - 1] < -box_tol) return kInf;
  for (int i = 0; i + 1 < l_; ++i)
    if (u[i + 1] > u[i] + box_tol) return kInf;

  double unorm = 0.0;
  for (int i = 0; i < l_; ++i) unorm = std::max(unorm, std::fabs(u[i]));

  ProxScratch s;
  double fallback = kInf;
  for (double tau : {1e-6, 1e-9}) {
    solve_qp(pix, u, tau, s);
    double res = 0.0, fb = 0.0;
    for (int i = 0; i < l_; ++i) res = std::max(res, std::fabs(s.u[i] - u[i]));
    for (size_t j = 0; j < s.active.size(); ++j) fb += s.weight[j] * shifted_cost(pix, s.active[j]);
    fallback = fb;

    // refine on the identified face: weights over the active set hitting u
    const int r = int(s.active.size());
    const int m = r + 1;
    s.kkt.assign(size_t(m) * m, 0.0);
    s.sol.assign(m, 0.0);
    std::vector<double> up(l_ + 1, 0.0);
    for (int i = 0; i < l_; ++i) up[i + 1] = up[i] + u[i];
    for (int a = 0; a < r; ++a) {
      for (int bb = 0; bb < r; ++bb) s.kkt[size_t(a) * m + bb] = point_dot(s.active[a], s.active[bb]);
      s.kkt[size_t(a) * m + a] += 1e-13 * (1.0 + l_);
      s.kkt[size_t(a) * m + r] = 1.0;
      s.kkt[size_t(r) * m + a] = 1.0;
      const SublabelCoord c = point_coord(s.active[a]);
      s.sol[a] = up[c.interval] + c.alpha * u[c.interval];
    }
    s.sol[r] = 1.0;
    std::vector<double> mat = s.kkt;
    if (solve_dense(m, mat.data(), s.sol.data())) {
      bool ok = true;
      for (int a = 0; a < r; ++a) ok = ok && s.sol[a] >= -1e-9;
      if (ok) {
        std::vector<double> uu(l_, 0.0);
        double upper = 0.0, wsum = 0.0;
        for (int a = 0; a < r; ++a) {
          const double wa = std::max(s.sol[a], 0.0);
          const SublabelCoord c = point_coord(s.active[a]);
          for (int i = 0; i < c.interval; ++i) uu[i] += wa;
          uu[c.interval] += wa * c.alpha;
          upper += wa * shifted_cost(pix, s.active[a]);
          wsum += wa;
        }
        double face_res = std::fabs(wsum - 1.0);
        for (int i = 0; i < l_; ++i) face_res = std::max(face_res, std::fabs(uu[i] - u[i]));
        if (face_res <= 1e-7 * (1.0 + unorm)) {
          for (int i = 0; i < l_; ++i) s.y[i] = (u[i] - s.u[i]) / tau;
          double lower = -conjugate_max(pix, s.y).val;
          for (int i = 0; i < l_; ++i) lower += u[i] * s.y[i];
          if (upper - lower <= 1e-6 * (1.0 + std::fabs(upper))) return upper;
        }
      }
    }
    if (res > 1e-3 * (1.0 + unorm)) return kInf;
  }
  return fallback;
}

}  // namespace sublift
