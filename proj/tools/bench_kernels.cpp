// Times the OpenMP pixel kernels against their serial references and checks
// that both produce identical bytes.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

#include "sublift/dataterm.hpp"
#include "sublift/parallel.hpp"
#include "sublift/regularizer.hpp"

using namespace sublift;
using Clock = std::chrono::steady_clock;

namespace {

struct QuadSampler final : CostSampler {
  int width;
  double cost(int pix, double t) const override {
    const double f = 0.5 + 0.4 * std::sin(0.1 * (pix % width)) * std::cos(0.07 * (pix / width));
    return 10.0 * (t - f) * (t - f);
  }
};

template <class F>
double time_ms(int reps, F&& body) {
  body();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) body();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

void line(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-22s %10.3f ms %10.3f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int n = 256, l = 4, reps = 20;
  if (argc > 1 && std::strcmp(argv[1], "--quick") == 0) {
    n = 64;
    reps = 3;
  }
  if (argc > 2) n = std::atoi(argv[2]);

  PixelGrid g{n, n, 1.0};
  const LabelSpace space = LabelSpace::uniform(0.0, 1.0, l + 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  LiftedField u(n, n, l);
  DualField q(n, n, l);
  for (double& x : u.v) x = U(rng);
  for (double& x : q.v) x = U(rng);

  std::printf("grid %dx%d, %d channels, %d reps\n", n, n, l, reps);
  std::printf("%-22s %13s %13s\n", "kernel", "serial", "openmp");

  DualField g1, g2;
  const double ts = time_ms(reps, [&] { serial::grad(g, u, g1); });
  const double tp = time_ms(reps, [&] { grad(g, u, g2); });
  line("grad", ts, tp, g1.v == g2.v);

  LiftedField d1, d2;
  const double ds = time_ms(reps, [&] { serial::div_adjoint(g, q, d1); });
  const double dp = time_ms(reps, [&] { div_adjoint(g, q, d2); });
  line("div_adjoint", ds, dp, d1.v == d2.v);

  const ConstraintSet set = ConstraintSet::isotropic(space);
  DualField p1 = q, p2 = q;
  const double ps = time_ms(reps, [&] {
    p1 = q;
    serial::project_K(p1, set);
  });
  const double pp = time_ms(reps, [&] {
    p2 = q;
    project_K(p2, set);
  });
  line("project_K (iso)", ps, pp, p1.v == p2.v);

  const double ls = time_ms(reps, [&] { (void)serial::lifted_tv(g, u, set); });
  const double lp = time_ms(reps, [&] { (void)lifted_tv(g, u, set); });
  line("lifted_tv", ls, lp, serial::lifted_tv(g, u, set) == lifted_tv(g, u, set));

  // full data-prox sweep, warm active sets
  QuadSampler s;
  s.width = n;
  auto term = LiftedDataTerm::build(s, g, space, 16);
  std::vector<ProxScratch> sc1(g.npix()), sc2(g.npix());
  LiftedField o1(n, n, l), o2(n, n, l);
  LiftedField z(n, n, l);
  for (int p = 0; p < g.npix(); ++p)
    for (int i = 0; i < l; ++i) z.at(p)[i] = 0.5 + 0.4 * U(rng);
  const double xs = time_ms(reps, [&] {
    serial_for(g.npix(), [&](int p) { term.prox(p, z.at(p), 0.35, o1.at(p), sc1[p]); });
  });
  const double xp = time_ms(reps, [&] {
    parallel_for(g.npix(), [&](int p) { term.prox(p, z.at(p), 0.35, o2.at(p), sc2[p]); });
  });
  line("prox sweep", xs, xp, o1.v == o2.v);
  return 0;
}
