#include "sublift/labels.hpp"

#include <algorithm>
#include <cmath>

namespace sublift {

LabelSpace LabelSpace::from_labels(std::vector<double> labels) {
  if (labels.size() < 2) throw ConfigError("LabelSpace: need at least two labels");
  for (size_t i = 0; i + 1 < labels.size(); ++i) {
    if (!(labels[i] < labels[i + 1]) || !std::isfinite(labels[i]))
      throw ConfigError("LabelSpace: labels must be finite and strictly increasing");
  }
  if (!std::isfinite(labels.back())) throw ConfigError("LabelSpace: labels must be finite");
  LabelSpace s;
  s.labels = std::move(labels);
  s.widths.resize(s.labels.size() - 1);
  for (size_t i = 0; i + 1 < s.labels.size(); ++i) s.widths[i] = s.labels[i + 1] - s.labels[i];
  return s;
}

LabelSpace LabelSpace::uniform(double lo, double hi, int count) {
  if (count < 2) throw ConfigError("LabelSpace: need at least two labels");
  if (!(lo < hi)) throw ConfigError("LabelSpace: empty range");
  std::vector<double> labels(count);
  for (int i = 0; i < count; ++i) labels[i] = lo + (hi - lo) * double(i) / double(count - 1);
  labels.back() = hi;
  return from_labels(std::move(labels));
}

double value_of(const LabelSpace& space, SublabelCoord c) {
  return space.labels[c.interval] + c.alpha * space.widths[c.interval];
}

SublabelCoord locate(const LabelSpace& space, double t) {
  const int l = space.sublabel_count();
  const double tol = 1e-12 * (1.0 + std::fabs(space.range_min()) + std::fabs(space.range_max()));
  if (t < space.range_min() - tol || t > space.range_max() + tol)
    throw ConfigError("locate: value outside label range");
  t = std::clamp(t, space.range_min(), space.range_max());

  // first interval with t < gamma_{i+1}; the top label lands in the last one
  int i = int(std::upper_bound(space.labels.begin(), space.labels.end(), t) -
              space.labels.begin()) -
          1;
  i = std::clamp(i, 0, l - 1);
  const double alpha = std::clamp((t - space.labels[i]) / space.widths[i], 0.0, 1.0);
  return {i, alpha};
}

void lift_scalar(const LabelSpace& space, double t, std::span<double> out) {
  const int l = space.sublabel_count();
  const SublabelCoord c = locate(space, t);
  for (int j = 0; j < c.interval; ++j) out[j] = 1.0;
  out[c.interval] = c.alpha;
  for (int j = c.interval + 1; j < l; ++j) out[j] = 0.0;
}

std::vector<double> lift_scalar(const LabelSpace& space, double t) {
  std::vector<double> out(space.sublabel_count());
  lift_scalar(space, t, out);
  return out;
}

double project_lifted(const LabelSpace& space, std::span<const double> u) {
  double t = space.range_min();
  for (size_t i = 0; i < u.size(); ++i) t += u[i] * space.widths[i];
  return t;
}

IntegralityResult integrality_check(std::span<const double> u, double eps) {
  const int l = int(u.size());
  int i = l - 1;
  for (int j = 0; j < l; ++j) {
    if (u[j] < 1.0 - eps) {
      i = j;
      break;
    }
  }
  const double alpha = std::clamp(u[i], 0.0, 1.0);
  bool ok = true;
  for (int j = 0; j < l && ok; ++j) {
    const double want = j < i ? 1.0 : (j == i ? alpha : 0.0);
    ok = std::fabs(u[j] - want) <= eps;
  }
  IntegralityResult r;
  r.integral = ok;
  if (ok) r.coord = {i, alpha};
  return r;
}

std::vector<double> round_to_integral(const LabelSpace& space, std::span<const double> u) {
  const double t =
      std::clamp(project_lifted(space, u), space.range_min(), space.range_max());
  return lift_scalar(space, t);
}

}  // namespace sublift
