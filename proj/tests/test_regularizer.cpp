#include <cmath>
#include <random>

#include "doctest.h"
#include "sublift/regularizer.hpp"

using namespace sublift;

namespace {

void fill_random(std::vector<double>& v, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  for (double& x : v) x = U(rng);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

TEST_SUITE_BEGIN("regularizer");

TEST_CASE("grad of constants is zero, single forward difference") {
  PixelGrid g{2, 1, 1.0};
  ScalarField u{2, 1};
  u[0] = 0.0;
  u[1] = 1.0;
  VecField gr;
  grad(g, u, gr);
  CHECK(gr.at(0)[0] == doctest::Approx(1.0));
  CHECK(gr.at(0)[1] == 0.0);
  CHECK(gr.at(1)[0] == 0.0);
  CHECK(gr.at(1)[1] == 0.0);

  LiftedField c(5, 4, 3, 0.77);
  PixelGrid g2{5, 4, 1.0};
  DualField gc;
  grad(g2, c, gc);
  for (double x : gc.v) CHECK(x == 0.0);
}

TEST_CASE("grad of a lifted step matches channel indicators") {
  PixelGrid g{2, 1, 1.0};
  LabelSpace s = LabelSpace::from_labels({0.0, 0.5, 1.0});
  LiftedField u(2, 1, 2);
  auto lo = lift_scalar(s, 0.0), hi = lift_scalar(s, 1.0);
  for (int i = 0; i < 2; ++i) {
    u.at(0)[i] = lo[i];
    u.at(1)[i] = hi[i];
  }
  DualField gr;
  grad(g, u, gr);
  for (int i = 0; i < 2; ++i) {
    CHECK(gr.row(0, i)[0] == doctest::Approx(hi[i] - lo[i]));
    CHECK(gr.row(1, i)[0] == 0.0);
  }
}

TEST_CASE("div_adjoint of single entry and zero") {
  PixelGrid g{2, 1, 1.0};
  DualField q(2, 1, 1);
  q.row(0, 0)[0] = 0.7;
  LiftedField d;
  div_adjoint(g, q, d);
  CHECK(d.at(0)[0] == doctest::Approx(-0.7));
  CHECK(d.at(1)[0] == doctest::Approx(0.7));

  DualField z(3, 3, 2);
  div_adjoint(PixelGrid{3, 3, 1.0}, z, d);
  for (double x : d.v) CHECK(x == 0.0);
}

TEST_CASE("adjointness on random fields") {
  std::mt19937_64 rng(3);
  for (auto [w, h] : {std::pair{16, 16}, {1, 9}, {9, 1}, {5, 3}}) {
    PixelGrid g{w, h, 0.5};
    LiftedField u(w, h, 3);
    DualField q(w, h, 3);
    for (int rep = 0; rep < 3; ++rep) {
      fill_random(u.v, rng);
      fill_random(q.v, rng);
      DualField gu;
      grad(g, u, gu);
      LiftedField dq;
      div_adjoint(g, q, dq);
      const double lhs = dot(q.v, gu.v);
      const double rhs = dot(dq.v, u.v);
      CHECK(std::fabs(lhs - rhs) <= 1e-10 * (norm(q.v) * norm(u.v) + 1.0));
    }
  }
}

TEST_CASE("project_K rows") {
  LabelSpace s = LabelSpace::from_labels({0.0, 0.5, 1.0});
  DualField q(1, 1, 2);

  SUBCASE("isotropic rescale") {
    q.row(0, 0)[0] = 3.0;
    q.row(0, 0)[1] = 4.0;
    project_K(q, ConstraintSet::isotropic(s));
    CHECK(q.row(0, 0)[0] == doctest::Approx(0.3));
    CHECK(q.row(0, 0)[1] == doctest::Approx(0.4));
  }
  SUBCASE("anisotropic clamp") {
    q.row(0, 0)[0] = 0.9;
    q.row(0, 0)[1] = -0.1;
    project_K(q, ConstraintSet::anisotropic(s));
    CHECK(q.row(0, 0)[0] == doctest::Approx(0.5));
    CHECK(q.row(0, 0)[1] == doctest::Approx(-0.1));
  }
  SUBCASE("feasible points are fixed") {
    q.row(0, 1)[0] = 0.2;
    q.row(0, 1)[1] = -0.3;
    DualField before = q;
    project_K(q, ConstraintSet::isotropic(s));
    for (size_t i = 0; i < q.v.size(); ++i) CHECK(q.v[i] == before.v[i]);
  }
}

TEST_CASE("projection idempotent, feasible, non-expansive") {
  std::mt19937_64 rng(5);
  LabelSpace s = LabelSpace::from_labels({0.0, 0.2, 0.9, 1.0});
  for (auto kind : {ConstraintSet::Kind::iso, ConstraintSet::Kind::aniso}) {
    const ConstraintSet set{kind, s.widths};
    for (int it = 0; it < 200; ++it) {
      DualField a(2, 2, 3), b(2, 2, 3);
      fill_random(a.v, rng, -2.0, 2.0);
      fill_random(b.v, rng, -2.0, 2.0);
      DualField pa = a, pb = b;
      project_K(pa, set);
      project_K(pb, set);
      DualField ppa = pa;
      project_K(ppa, set);
      double drift = 0.0;
      for (size_t i = 0; i < pa.v.size(); ++i) drift = std::max(drift, std::fabs(ppa.v[i] - pa.v[i]));
      CHECK(drift <= 1e-12);
      // feasibility
      for (int p = 0; p < 4; ++p)
        for (int i = 0; i < 3; ++i) {
          const double* row = pa.row(p, i);
          if (kind == ConstraintSet::Kind::aniso) {
            CHECK(std::fabs(row[0]) <= set.radii[i] + 1e-12);
            CHECK(std::fabs(row[1]) <= set.radii[i] + 1e-12);
          } else {
            CHECK(std::hypot(row[0], row[1]) <= set.radii[i] + 1e-12);
          }
        }
      std::vector<double> da(a.v.size()), dp(a.v.size());
      for (size_t i = 0; i < a.v.size(); ++i) {
        da[i] = a.v[i] - b.v[i];
        dp[i] = pa.v[i] - pb.v[i];
      }
      CHECK(norm(dp) <= norm(da) + 1e-12);
    }
  }
}

TEST_CASE("lifted_tv closed forms") {
  PixelGrid g{2, 1, 1.0};
  LabelSpace s = LabelSpace::from_labels({0.0, 0.5, 1.0});
  LiftedField u(2, 1, 2);
  auto lo = lift_scalar(s, 0.0), hi = lift_scalar(s, 1.0);
  for (int i = 0; i < 2; ++i) {
    u.at(0)[i] = lo[i];
    u.at(1)[i] = hi[i];
  }
  CHECK(lifted_tv(g, u, ConstraintSet::anisotropic(s)) == doctest::Approx(1.0));
  CHECK(lifted_tv(g, u, ConstraintSet::isotropic(s)) == doctest::Approx(1.0));

  LiftedField c(4, 4, 2, 0.3);
  CHECK(lifted_tv(PixelGrid{4, 4, 1.0}, c, ConstraintSet::anisotropic(s)) == 0.0);
}

TEST_CASE("scalar_tv") {
  PixelGrid g{2, 2, 1.0};
  ScalarField u{2, 2};
  u.at(0, 0) = 0.0;
  u.at(1, 0) = 1.0;
  u.at(0, 1) = 0.0;
  u.at(1, 1) = 1.0;
  CHECK(scalar_tv(g, u, ConstraintSet::Kind::aniso) == doctest::Approx(2.0));

  // square indicator: anisotropic TV = 4 * side * height
  PixelGrid g2{16, 16, 1.0};
  ScalarField sq{16, 16, 0.0};
  const int k = 4;
  const double c = 0.7;
  for (int y = 6; y < 6 + k; ++y)
    for (int x = 5; x < 5 + k; ++x) sq.at(x, y) = c;
  CHECK(scalar_tv(g2, sq, ConstraintSet::Kind::aniso) == doctest::Approx(4.0 * k * c));
  CHECK(scalar_tv(g2, ScalarField{16, 16, 0.4}, ConstraintSet::Kind::iso) == 0.0);
}

TEST_CASE("discrete coarea: lifted TV of a lifted image equals scalar TV (anisotropic)") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  LabelSpace s = LabelSpace::from_labels({0.0, 0.21, 0.55, 1.0});
  PixelGrid g{16, 16, 1.0};
  for (int rep = 0; rep < 20; ++rep) {
    ScalarField img{16, 16};
    for (double& x : img.v) x = U(rng);
    LiftedField lu(16, 16, 3);
    for (int p = 0; p < 256; ++p) lift_scalar(s, img[p], lu.at(p));
    const double lifted_an = lifted_tv(g, lu, ConstraintSet::anisotropic(s));
    const double scalar_an = scalar_tv(g, img, ConstraintSet::Kind::aniso);
    CHECK(std::fabs(lifted_an - scalar_an) <= 1e-9 * (1.0 + scalar_an));
    // isotropic only dominates
    const double lifted_iso = lifted_tv(g, lu, ConstraintSet::isotropic(s));
    const double scalar_iso = scalar_tv(g, img, ConstraintSet::Kind::iso);
    CHECK(lifted_iso >= scalar_iso - 1e-9);
  }
}

TEST_CASE("support-function consistency: closed form dominates sampled duals") {
  std::mt19937_64 rng(23);
  LabelSpace s = LabelSpace::from_labels({0.0, 0.4, 1.0});
  PixelGrid g{6, 5, 1.0};
  LiftedField u(6, 5, 2);
  fill_random(u.v, rng, 0.0, 1.0);
  DualField gu;
  grad(g, u, gu);
  for (auto kind : {ConstraintSet::Kind::iso, ConstraintSet::Kind::aniso}) {
    const ConstraintSet set{kind, s.widths};
    const double closed = lifted_tv(g, u, set);
    double best = -1e300;
    for (int it = 0; it < 200; ++it) {
      DualField q(6, 5, 2);
      fill_random(q.v, rng, -2.0, 2.0);
      project_K(q, set);
      double pair = 0.0;
      for (size_t i = 0; i < q.v.size(); ++i) pair += q.v[i] * gu.v[i];
      best = std::max(best, pair);
    }
    CHECK(closed >= best - 1e-10);
  }
}

TEST_CASE("serial reference kernels match the parallel ones bitwise") {
  std::mt19937_64 rng(29);
  PixelGrid g{23, 17, 0.7};
  LiftedField u(23, 17, 4);
  DualField q(23, 17, 4);
  fill_random(u.v, rng);
  fill_random(q.v, rng, -2.0, 2.0);

  DualField g1, g2;
  grad(g, u, g1);
  serial::grad(g, u, g2);
  CHECK(g1.v == g2.v);

  LiftedField d1, d2;
  div_adjoint(g, q, d1);
  serial::div_adjoint(g, q, d2);
  CHECK(d1.v == d2.v);

  LabelSpace s = LabelSpace::uniform(0.0, 1.0, 5);
  for (auto kind : {ConstraintSet::Kind::iso, ConstraintSet::Kind::aniso}) {
    const ConstraintSet set{kind, s.widths};
    DualField p1 = q, p2 = q;
    project_K(p1, set);
    serial::project_K(p2, set);
    CHECK(p1.v == p2.v);
    CHECK(lifted_tv(g, u, set) == serial::lifted_tv(g, u, set));
  }
}

TEST_SUITE_END();
