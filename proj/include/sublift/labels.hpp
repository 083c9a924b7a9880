#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sublift/errors.hpp"

namespace sublift {

// Ordered label grid gamma_1 < ... < gamma_L covering the value range.
// widths[i] = gamma_{i+1} - gamma_i holds the l = L-1 interval widths.
struct LabelSpace {
  std::vector<double> labels;
  std::vector<double> widths;

  static LabelSpace from_labels(std::vector<double> labels);
  static LabelSpace uniform(double lo, double hi, int count);

  int label_count() const { return int(labels.size()); }
  int sublabel_count() const { return int(widths.size()); }
  double range_min() const { return labels.front(); }
  double range_max() const { return labels.back(); }
  double range() const { return labels.back() - labels.front(); }
};

// Position inside the label grid: interval index (0-based, < l) plus the
// fraction alpha in [0,1] along that interval.
struct SublabelCoord {
  int interval = 0;
  double alpha = 0.0;
};

struct IntegralityResult {
  bool integral = false;
  SublabelCoord coord;  // valid only when integral
};

// gamma_i + alpha * (gamma_{i+1} - gamma_i)
double value_of(const LabelSpace& space, SublabelCoord c);

// Interval/fraction of a value under the half-open convention of
// lift_scalar. Out-of-range t throws ConfigError.
SublabelCoord locate(const LabelSpace& space, double t);

// The unique unit-step vector whose projection equals t. Intervals are
// half-open [gamma_i, gamma_{i+1}); t = gamma_L maps to (l-1, alpha = 1).
// Out-of-range t throws ConfigError.
std::vector<double> lift_scalar(const LabelSpace& space, double t);
void lift_scalar(const LabelSpace& space, double t, std::span<double> out);

// gamma_1 + <u, widths>; exact inverse of lift_scalar on unit-step vectors.
double project_lifted(const LabelSpace& space, std::span<const double> u);

// True iff u is within componentwise distance eps of some unit-step vector
// (ones, one fractional entry, zeros). The candidate interval is the first
// entry below 1 - eps (last interval if none), alpha clamped to [0,1].
IntegralityResult integrality_check(std::span<const double> u, double eps);

// Nearest unit-step vector by label value: clamp the projection into the
// label range, then lift. Idempotent.
std::vector<double> round_to_integral(const LabelSpace& space, std::span<const double> u);

}  // namespace sublift
