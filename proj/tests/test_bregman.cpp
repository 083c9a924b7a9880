#include <cmath>
#include <random>

#include "doctest.h"
#include "sublift/bregman.hpp"
#include "sublift/problems.hpp"

using namespace sublift;

TEST_SUITE_BEGIN("bregman");

TEST_CASE("classical step on constant input: perfect fit, zero subgradient") {
  PixelGrid g{6, 4, 1.0};
  ScalarField f{6, 4, 0.41};
  SolverConfig cfg;
  cfg.max_iters = 2000;
  auto s1 = classical_step(initial_classical_state(g), f, 20.0, ConstraintSet::Kind::aniso, g, cfg);
  CHECK(s1.k == 1);
  for (int p = 0; p < g.npix(); ++p) {
    CHECK(std::fabs(s1.u_scalar[p] - 0.41) <= 1e-10);
    CHECK(std::fabs(s1.p_scalar[p]) <= 1e-8);
  }
}

TEST_CASE("classical fidelity is non-increasing over the steps") {
  const int n = 16;
  PixelGrid g{n, n, 1.0 / n};
  SyntheticScene scene;
  scene.background = 0.25;
  scene.shapes.push_back({Shape::Kind::square, 5.5, 5.5, 3.5, 0.55});
  scene.shapes.push_back({Shape::Kind::square, 12.0, 12.0, 2.0, 0.35});
  ScalarField f = make_scene_image(scene, g);
  BregmanProblem prob;
  prob.grid = g;
  prob.kind = ConstraintSet::Kind::aniso;
  prob.f = f;
  prob.lambda = 20.0;
  SolverConfig cfg;
  cfg.max_iters = 8000;
  cfg.tol = 1e-8;
  auto states = run_iteration(BregmanMode::classical, prob, 5, cfg, false);
  for (size_t k = 1; k < states.size(); ++k)
    CHECK(states[k].energies.fidelity <= states[k - 1].energies.fidelity + 1e-6);
}

TEST_CASE("extract_subgradient basics") {
  PixelGrid g{4, 3, 1.0};
  SaddleSolution sol;
  sol.q = DualField(4, 3, 2);
  sol.u = LiftedField(4, 3, 2);
  auto p = extract_subgradient(g, sol);
  for (double x : p.v) CHECK(x == 0.0);

  // div-form fields pair to zero against constants, channel by channel
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& x : sol.q.v) x = U(rng);
  p = extract_subgradient(g, sol);
  for (int i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (int px = 0; px < g.npix(); ++px) sum += p.at(px)[i];
    CHECK(std::fabs(sum) <= 1e-12);
  }
}

TEST_CASE("fenchel certificate on converged solutions") {
  PixelGrid g{8, 8, 1.0 / 8};
  SyntheticScene scene;
  scene.background = 0.3;
  scene.shapes.push_back({Shape::Kind::square, 3.5, 3.5, 2.0, 0.45});
  ScalarField f = make_scene_image(scene, g);
  RofSampler s(f, 20.0);
  const LabelSpace space = LabelSpace::uniform(0, 1, 4);
  auto term = LiftedDataTerm::build(s, g, space, 32);
  const ConstraintSet set = ConstraintSet::anisotropic(space);
  SolverConfig cfg;
  cfg.tol = 1e-9;
  cfg.max_iters = 30000;
  auto sol = solve_lifted(term, set, g, nullptr, cfg);
  DualField gu;
  grad(g, sol.u, gu);
  double pair = 0.0;
  for (size_t i = 0; i < gu.v.size(); ++i) pair += gu.v[i] * sol.q.v[i];
  const double tv = lifted_tv(g, sol.u, set);
  CHECK(std::fabs(pair - tv) <= 1e-4 * (1.0 + tv));
}

TEST_CASE("transform_subgradient row scaling") {
  PixelGrid g{1, 1, 1.0};
  const LabelSpace space = LabelSpace::from_labels({0.0, 0.5, 1.0});
  LiftedField u(1, 1, 2);
  u.at(0)[0] = 0.3;  // unit-step vector with interval 0, alpha 0.3
  u.at(0)[1] = 0.0;
  DualField q(1, 1, 2);
  q.row(0, 0)[0] = 0.5;
  q.row(0, 1)[0] = -0.2;
  auto tr = transform_subgradient(g, q, u, space, 1e-3);
  CHECK(tr.flagged == 0);
  CHECK(tr.q_t.row(0, 0)[0] == doctest::Approx(0.5));
  CHECK(tr.q_t.row(0, 1)[0] == doctest::Approx(0.5));
  CHECK(tr.q_t.row(0, 0)[1] == 0.0);
  CHECK(tr.q_t.row(0, 1)[1] == 0.0);
}

TEST_CASE("transform of zero is zero; saturated rows map to the width pattern") {
  PixelGrid g{2, 1, 1.0};
  const LabelSpace space = LabelSpace::from_labels({0.0, 0.2, 0.7, 1.0});
  LiftedField u(2, 1, 3);
  u.at(0)[0] = 1.0;
  u.at(0)[1] = 0.4;  // interval 1
  DualField q(2, 1, 3);
  auto tr0 = transform_subgradient(g, q, u, space, 1e-3);
  for (double x : tr0.q_t.v) CHECK(x == 0.0);
  for (double x : tr0.p_scalar.v) CHECK(x == 0.0);

  // active row at +width_i: the transform emits +widths on every row
  q.row(0, 1)[0] = space.widths[1];
  auto tr = transform_subgradient(g, q, u, space, 1e-3);
  for (int j = 0; j < 3; ++j)
    CHECK(tr.q_t.row(0, j)[0] == doctest::Approx(space.widths[j]).epsilon(1e-14));
  DualField feas = tr.q_t;
  project_K(feas, ConstraintSet::anisotropic(space));
  for (size_t i = 0; i < feas.v.size(); ++i) CHECK(feas.v[i] == tr.q_t.v[i]);
}

TEST_CASE("transform feasibility and structure on random inputs") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const LabelSpace space = LabelSpace::from_labels({0.0, 0.3, 0.8, 1.0});
  PixelGrid g{5, 4, 1.0};
  const ConstraintSet an = ConstraintSet::anisotropic(space);
  const ConstraintSet iso = ConstraintSet::isotropic(space);
  for (int it = 0; it < 250; ++it) {
    DualField q(5, 4, 3);
    for (double& x : q.v) x = 4.0 * U(rng) - 2.0;
    const bool use_iso = it % 2 == 0;
    project_K(q, use_iso ? iso : an);
    LiftedField u(5, 4, 3);
    for (int p = 0; p < g.npix(); ++p)
      lift_scalar(space, U(rng), u.at(p));  // sublabel-integral by construction
    auto tr = transform_subgradient(g, q, u, space, 1e-3);
    CHECK(tr.flagged == 0);
    DualField proj = tr.q_t;
    project_K(proj, use_iso ? iso : an);
    double drift = 0.0;
    for (size_t i = 0; i < proj.v.size(); ++i)
      drift = std::max(drift, std::fabs(proj.v[i] - tr.q_t.v[i]));
    CHECK(drift <= 1e-12);

    // div_adjoint of the structured field is p_scalar * widths, entrywise
    LiftedField dq;
    div_adjoint(g, tr.q_t, dq);
    double mism = 0.0;
    for (int p = 0; p < g.npix(); ++p)
      for (int i = 0; i < 3; ++i)
        mism = std::max(mism, std::fabs(dq.at(p)[i] - tr.p_scalar[p] * space.widths[i]));
    CHECK(mism <= 1e-12);
  }
}

TEST_CASE("transform preserves the attained dual value at exact maximizers") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const LabelSpace space = LabelSpace::from_labels({0.0, 0.25, 0.65, 1.0});
  PixelGrid g{6, 6, 1.0};
  const ConstraintSet an = ConstraintSet::anisotropic(space);
  for (int it = 0; it < 50; ++it) {
    LiftedField u(6, 6, 3);
    for (int p = 0; p < g.npix(); ++p) lift_scalar(space, U(rng), u.at(p));
    DualField gu;
    grad(g, u, gu);
    // an exact dual maximizer: saturated where the gradient is active
    DualField q(6, 6, 3);
    for (int p = 0; p < g.npix(); ++p)
      for (int i = 0; i < 3; ++i)
        for (int d = 0; d < 2; ++d) {
          const double gv = gu.row(p, i)[d];
          q.row(p, i)[d] = gv != 0.0 ? space.widths[i] * (gv > 0 ? 1.0 : -1.0)
                                     : space.widths[i] * (2.0 * U(rng) - 1.0);
        }
    double pair = 0.0;
    for (size_t i = 0; i < q.v.size(); ++i) pair += q.v[i] * gu.v[i];
    const double tv = lifted_tv(g, u, an);
    REQUIRE(std::fabs(pair - tv) <= 1e-10 * (1.0 + tv));  // q attains the max

    auto tr = transform_subgradient(g, q, u, space, 1e-3);
    double pair_t = 0.0;
    for (size_t i = 0; i < q.v.size(); ++i) pair_t += tr.q_t.v[i] * gu.v[i];
    CHECK(std::fabs(pair_t - pair) <= 1e-9 * (1.0 + std::fabs(pair)));
  }
}

TEST_CASE("transform rounds non-integral pixels and counts them") {
  PixelGrid g{1, 1, 1.0};
  const LabelSpace space = LabelSpace::from_labels({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
  LiftedField u(1, 1, 3);
  u.at(0)[0] = 0.6;
  u.at(0)[1] = 0.5;
  u.at(0)[2] = 0.4;  // projects to 0.5: interval 1
  DualField q(1, 1, 3);
  q.row(0, 1)[0] = 0.1;
  auto tr = transform_subgradient(g, q, u, space, 1e-3);
  CHECK(tr.flagged == 1);
  CHECK(tr.q_t.row(0, 0)[0] == doctest::Approx(0.1));  // equal widths scale by 1
}

TEST_CASE("first lifted step is a plain solve") {
  PixelGrid g{5, 5, 1.0};
  SyntheticScene scene;
  scene.background = 0.2;
  scene.shapes.push_back({Shape::Kind::square, 2.0, 2.0, 1.0, 0.6});
  ScalarField f = make_scene_image(scene, g);
  RofSampler s(f, 10.0);
  const LabelSpace space = LabelSpace::uniform(0, 1, 3);
  auto term = LiftedDataTerm::build(s, g, space, 8);
  const ConstraintSet set = ConstraintSet::anisotropic(space);
  SolverConfig cfg;
  cfg.max_iters = 3000;
  cfg.tol = 1e-9;

  auto step = lifted_step(initial_lifted_state(g, 2), term, space, set, g, cfg, true);
  auto plain = solve_lifted(term, set, g, nullptr, cfg);
  for (size_t i = 0; i < plain.u.v.size(); ++i) CHECK(step.u_lifted.v[i] == plain.u.v[i]);
  CHECK(step.k == 1);
}

TEST_CASE("run_iteration with K=1 matches the single step") {
  PixelGrid g{4, 4, 1.0};
  ScalarField f{4, 4, 0.5};
  BregmanProblem prob;
  prob.grid = g;
  prob.f = f;
  prob.lambda = 5.0;
  prob.kind = ConstraintSet::Kind::aniso;
  SolverConfig cfg;
  cfg.max_iters = 1000;
  auto states = run_iteration(BregmanMode::classical, prob, 1, cfg, false);
  REQUIRE(states.size() == 1);
  auto direct = classical_step(initial_classical_state(g), f, 5.0, prob.kind, g, cfg);
  for (int p = 0; p < g.npix(); ++p) CHECK(states[0].u_scalar[p] == direct.u_scalar[p]);
}

TEST_CASE("mini equivalence: transformed lifted tracks classical") {
  const int n = 8;
  PixelGrid g{n, n, 1.0 / n};
  SyntheticScene scene;
  scene.background = 0.25;
  scene.shapes.push_back({Shape::Kind::square, 3.0, 3.0, 2.0, 0.5});
  ScalarField f = make_scene_image(scene, g);
  BregmanProblem prob;
  prob.grid = g;
  prob.kind = ConstraintSet::Kind::aniso;
  prob.f = f;
  prob.lambda = 20.0;
  prob.space = LabelSpace::uniform(0, 1, 4);
  RofSampler s(f, 20.0);
  prob.sampler = &s;
  prob.subsamples = 32;
  prob.use_fidelity_ref = true;
  SolverConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iters = 20000;

  auto classical = run_iteration(BregmanMode::classical, prob, 3, cfg, false);
  auto lifted = run_iteration(BregmanMode::lifted, prob, 3, cfg, true);
  for (int k = 0; k < 3; ++k) {
    double dmax = 0.0;
    for (int p = 0; p < g.npix(); ++p)
      dmax = std::max(dmax, std::fabs(lifted[k].u_scalar[p] - classical[k].u_scalar[p]));
    CHECK(dmax <= 2e-2);
  }
}

TEST_SUITE_END();
