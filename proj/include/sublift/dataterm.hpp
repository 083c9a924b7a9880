#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sublift/fields.hpp"
#include "sublift/labels.hpp"

namespace sublift {

// Per-pixel cost evaluation contract: pix is the row-major pixel index,
// t a value inside the label range. Costs must be non-negative; +inf marks
// forbidden values, NaN and -inf are rejected at build time.
struct CostSampler {
  virtual ~CostSampler() = default;
  virtual double cost(int pix, double t) const = 0;
};

// Reusable per-pixel state of the prox solver. Holding on to it across calls
// for the same pixel warm-starts the active set.
struct ProxScratch {
  std::vector<int> active;
  std::vector<double> weight;
  std::vector<double> kkt, rhs, sol, u, y;
};

// Sampled-and-convexified lifted data term. Per pixel it represents the
// convex envelope of the support points (unit-step vector of gamma_i^alpha,
// sampled cost) over the monotone box, minus a linear Bregman shift <b, u>.
// The alpha grid has `subsamples` steps per label interval, so there are
// l*subsamples + 1 support points per pixel with shared interval endpoints.
class LiftedDataTerm {
 public:
  LiftedDataTerm() = default;

  // Tabulates costs at every gamma_i^{m/M} and builds the per-interval lower
  // convex hulls used by the conjugate and prox. Shift starts at zero.
  static LiftedDataTerm build(const CostSampler& sampler, const PixelGrid& grid,
                              const LabelSpace& space, int subsamples);

  const LabelSpace& space() const { return space_; }
  int subsamples() const { return M_; }
  int npix() const { return npix_; }
  int channels() const { return l_; }
  int points_per_pixel() const { return n_; }
  double sample_value(int k) const { return ts_[k]; }
  double sample_cost(int pix, int k) const { return costs_[size_t(pix) * n_ + k]; }

  // Bregman shift b = p * widths; replaces any previous shift.
  void set_bregman_shift(const ScalarField& p);
  // General per-pixel vector shift (untransformed subgradient mode).
  void set_lifted_shift(const LiftedField& b);
  void clear_shift();
  std::span<const double> shift(int pix) const {
    return {shift_.data() + size_t(pix) * l_, size_t(l_)};
  }

  // max over support points of <point, v + b> - cost: the exact conjugate of
  // the sampled-and-shifted term.
  double conjugate(int pix, std::span<const double> v) const;

  // Envelope value env(u) - <b, u>; +inf outside the hull of the support
  // points.
  double envelope(int pix, std::span<const double> u) const;

  // Unique minimizer of tau*(env(u) - <b,u>) + 0.5*||u - z||^2. The active-set
  // inner solver throws SolverError with the pixel id if it fails to reach
  // its gap tolerance within the iteration cap. env_value, when given,
  // receives the shifted envelope value at the minimizer (certified by the
  // solve, no extra work).
  void prox(int pix, std::span<const double> z, double tau, std::span<double> out,
            ProxScratch& scratch, double* env_value = nullptr) const;
  std::vector<double> prox(int pix, std::span<const double> z, double tau) const;

  // Support point k as (interval, alpha); k = interval*subsamples + m.
  SublabelCoord point_coord(int k) const {
    const int i = k == n_ - 1 ? l_ - 1 : k / M_;
    return {i, alphas_[k]};
  }

 private:
  struct ConjResult {
    double val = -std::numeric_limits<double>::infinity();
    int k = -1;
  };
  ConjResult conjugate_max(int pix, std::span<const double> v) const;
  double solve_qp(int pix, std::span<const double> z, double tau, ProxScratch& s) const;
  int hull_count(int pix, int i) const { return hull_cnt_[size_t(pix) * l_ + i]; }
  const int32_t* hull_idx(int pix, int i) const {
    return hull_idx_.data() + (size_t(pix) * l_ + i) * (M_ + 1);
  }
  const double* hull_slope(int pix, int i) const {
    return hull_slope_.data() + (size_t(pix) * l_ + i) * (M_ + 1);
  }
  double shifted_cost(int pix, int k) const;
  void point_vector(int k, std::span<double> out) const;
  double point_dot(int a, int b) const;

  LabelSpace space_;
  int M_ = 0, l_ = 0, n_ = 0, npix_ = 0;
  std::vector<double> ts_, alphas_;
  std::vector<double> costs_;
  std::vector<int32_t> hull_idx_;
  std::vector<int32_t> hull_cnt_;
  std::vector<double> hull_slope_;
  std::vector<double> hull_alpha_;
  std::vector<double> shift_;
};

}  // namespace sublift
