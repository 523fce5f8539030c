#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hjbvem/problem.hpp"

using namespace hjbvem;
using problem::Control;
using problem::ControlGridSpec;
using problem::HJBProblem;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("inclusive axes include both endpoints") {
  ControlGridSpec spec;
  spec.axes = {{2.0, 5.0, 3, false}};
  auto cs = problem::sample_control_set(spec);
  REQUIRE(cs.size() == 3);
  CHECK(cs[0].params[0] == doctest::Approx(2.0));
  CHECK(cs[1].params[0] == doctest::Approx(3.5));
  CHECK(cs[2].params[0] == doctest::Approx(5.0));
  CHECK(cs[0].index == 0);
  CHECK(cs[2].index == 2);

  spec.axes = {{0.7, 9.0, 1, false}};
  auto single = problem::sample_control_set(spec);
  REQUIRE(single.size() == 1);
  CHECK(single[0].params[0] == doctest::Approx(0.7));
}

TEST_CASE("half-open axes drop the upper endpoint") {
  ControlGridSpec spec;
  spec.axes = {{0.0, 2.0 * kPi, 4, true}};
  auto cs = problem::sample_control_set(spec);
  REQUIRE(cs.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(cs[i].params[0] == doctest::Approx(i * kPi / 2.0));
}

TEST_CASE("tensor grids enumerate the first axis slowest") {
  ControlGridSpec spec;
  spec.axes = {{0.0, 1.0, 2, false}, {0.0, 4.0, 4, true}};
  auto cs = problem::sample_control_set(spec);
  REQUIRE(cs.size() == 8);
  for (int i0 = 0; i0 < 2; ++i0)
    for (int i1 = 0; i1 < 4; ++i1) {
      const Control& a = cs[i0 * 4 + i1];
      CHECK(a.params[0] == doctest::Approx(static_cast<double>(i0)));
      CHECK(a.params[1] == doctest::Approx(static_cast<double>(i1)));
      CHECK(a.index == i0 * 4 + i1);
    }
}

TEST_CASE("explicit control lists are kept in order") {
  ControlGridSpec spec;
  spec.explicit_points = {{1.0}, {2.0}};
  auto cs = problem::sample_control_set(spec);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].params[0] == 1.0);
  CHECK(cs[1].params[0] == 2.0);
}

TEST_CASE("renormalization weight closed forms") {
  auto p1 = problem::make_builtin("example1");
  REQUIRE(p1.controls.size() == 1);
  // tr A + c = 7, |A|^2 + |b|^2/2 + c^2 = 19 + |x|^2/2.
  CHECK(problem::gamma(p1, {0.0, 0.0}, p1.controls[0]) == doctest::Approx(7.0 / 19.0).epsilon(1e-12));
  CHECK(problem::gamma(p1, {1.0, 1.0}, p1.controls[0]) == doctest::Approx(7.0 / 20.0).epsilon(1e-12));

  auto p2 = problem::make_builtin("example2", {16, 16, 8});
  // theta is the slow axis: control 0 has theta = 0, control 240 theta = pi/3.
  CHECK(p2.controls[0].params[0] == doctest::Approx(0.0));
  CHECK(p2.controls[240].params[0] == doctest::Approx(kPi / 3.0));
  CHECK(problem::gamma(p2, {0.3, 0.4}, p2.controls[0]) ==
        doctest::Approx(120.0 / 81.0).epsilon(1e-12));
  CHECK(problem::gamma(p2, {0.3, 0.4}, p2.controls[240]) ==
        doctest::Approx(8.0 / 7.0).epsilon(1e-12));

  auto p3 = problem::make_builtin("example3");
  const Vec2 x{1.0, 1.0};
  const double g1 = problem::gamma(p3, x, p3.controls[0]);
  const double g2 = problem::gamma(p3, x, p3.controls[1]);
  CHECK(g1 == doctest::Approx(4.0 / 11.0).epsilon(1e-12));
  CHECK(g2 == doctest::Approx(g1).epsilon(1e-14));
}

TEST_CASE("renormalization weight rejects degenerate data") {
  HJBProblem p;
  p.controls.controls = {{0, {}}};
  p.A = [](const Vec2&, const Control&) { return SymMat2{0.0, 0.0, 0.0}; };
  p.b = [](const Vec2&, const Control&) { return Vec2{0.0, 0.0}; };
  p.c = [](const Vec2&, const Control&) { return 0.0; };
  p.has_lower_order = false;
  p.lambda = 0.0;
  CHECK_THROWS_AS(problem::gamma(p, {0.5, 0.5}, p.controls[0]), std::domain_error);

  p.A = [](const Vec2&, const Control&) { return SymMat2{1.0, 0.0, 1.0}; };
  p.has_lower_order = true;  // needs lambda > 0
  CHECK_THROWS_AS(problem::gamma(p, {0.5, 0.5}, p.controls[0]), std::domain_error);
}

TEST_CASE("cordes audit of the first builtin") {
  auto p = problem::make_builtin("example1");
  auto rep = problem::check_cordes(p);
  CHECK(rep.lower_order_branch);
  // Ratio (38 + |x|^2) / 98 peaks at the far corner.
  CHECK(rep.sup_ratio == doctest::Approx(20.0 / 49.0).epsilon(1e-12));
  CHECK(rep.implied_eps == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(rep.declared_eps == doctest::Approx(0.45));
  CHECK(rep.pass);
  CHECK(rep.min_c == doctest::Approx(3.0));
  CHECK(rep.min_gamma == doctest::Approx(7.0 / 20.0).epsilon(1e-12));
  CHECK(rep.max_gamma == doctest::Approx(7.0 / 19.0).epsilon(1e-12));
  CHECK(!rep.notes.empty());
}

TEST_CASE("cordes audit of the second builtin") {
  auto p = problem::make_builtin("example2", {16, 16, 8});
  auto rep = problem::check_cordes(p, 16);
  CHECK(rep.lower_order_branch);
  CHECK(rep.sup_ratio == doctest::Approx(7.0 / 15.0).epsilon(1e-12));
  CHECK(rep.implied_eps == doctest::Approx(1.0 / 7.0).epsilon(1e-10));
  CHECK(rep.pass);
  CHECK(rep.rho1 > 0.0);
  CHECK(rep.rho1 < rep.rho2);
  CHECK(rep.rho2 < 1.5);
}

TEST_CASE("cordes audit of the third builtin") {
  auto p = problem::make_builtin("example3");
  auto rep = problem::check_cordes(p, 32);
  CHECK(rep.lower_order_branch);
  CHECK(rep.sup_ratio == doctest::Approx(11.0 / 24.0).epsilon(1e-12));
  CHECK(rep.implied_eps == doctest::Approx(2.0 / 11.0).epsilon(1e-10));
  CHECK(rep.declared_eps == doctest::Approx(1.0 / 6.0));
  CHECK(rep.pass);
  CHECK(rep.min_c == doctest::Approx(1.0));
  CHECK(rep.rho1 == doctest::Approx(1.0).epsilon(1e-9));
}

namespace {

struct State {
  SymMat2 H;
  Vec2 g;
  double s = 0.0;
};

double renormalized_sup(const HJBProblem& p, const Vec2& x, const State& st) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Control& a : p.controls.controls) {
    const double val = problem::gamma(p, x, a) *
                       (p.A(x, a).frob(st.H) + p.b(x, a).dot(st.g) - p.c(x, a) * st.s - p.f(x, a));
    best = std::max(best, val);
  }
  return best;
}

// The renormalized operator differs from Lhat_lambda by a contraction in the
// mixed norm with factor sqrt(1 - eps); this is what makes the outer
// iteration well posed, so it is checked by direct sampling.
void check_contraction(const HJBProblem& p, int trials, std::mt19937& rng) {
  auto rep = problem::check_cordes(p, 16);
  const double eps = rep.implied_eps;
  REQUIRE(eps > 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> ux(p.domain.xmin, p.domain.xmax);
  std::uniform_real_distribution<double> uy(p.domain.ymin, p.domain.ymax);
  const double lam = p.lambda;
  for (int t = 0; t < trials; ++t) {
    const Vec2 x{ux(rng), uy(rng)};
    State v, d;
    v.H = {gauss(rng), gauss(rng), gauss(rng)};
    v.g = {gauss(rng), gauss(rng)};
    v.s = gauss(rng);
    d.H = {gauss(rng), gauss(rng), gauss(rng)};
    d.g = {gauss(rng), gauss(rng)};
    d.s = gauss(rng);
    State w{v.H + d.H, v.g + d.g, v.s + d.s};
    const double fw = renormalized_sup(p, x, w);
    const double fv = renormalized_sup(p, x, v);
    const double lhs = std::abs(fw - fv - (d.H.trace() - lam * d.s));
    const double rhs = std::sqrt(1.0 - eps) *
                       std::sqrt(d.H.frob_norm2() + 2.0 * lam * d.g.norm2() + lam * lam * d.s * d.s);
    CHECK(lhs <= rhs + 1e-9 * (1.0 + std::abs(fw) + std::abs(fv)));
  }
}

}  // namespace

TEST_CASE("renormalized sup is a contraction of the shifted laplacian") {
  std::mt19937 rng(20240915);
  check_contraction(problem::make_builtin("example1"), 300, rng);
  check_contraction(problem::make_builtin("example3"), 300, rng);
  check_contraction(problem::make_builtin("example2", {4, 4, 8}), 200, rng);
}

TEST_CASE("builtin loads satisfy the equation at the exact solution") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u01(0.05, 0.95);

  auto p1 = problem::make_builtin("example1");
  for (int t = 0; t < 30; ++t) {
    const Vec2 x{u01(rng), u01(rng)};
    const Control& a = p1.controls[0];
    const double res = p1.A(x, a).frob(p1.exact_hess(x)) + p1.b(x, a).dot(p1.exact_grad(x)) -
                       p1.c(x, a) * p1.exact_u(x) - p1.f(x, a);
    CHECK(std::abs(res) <= 1e-10 * (1.0 + std::abs(p1.f(x, a))));
  }

  auto p3 = problem::make_builtin("example3");
  for (int t = 0; t < 30; ++t) {
    const Vec2 x{(u01(rng) * 2.0 - 1.0) * kPi, (u01(rng) * 2.0 - 1.0) * kPi};
    for (int k = 0; k < 2; ++k) {
      const Control& a = p3.controls[k];
      const double res = p3.A(x, a).frob(p3.exact_hess(x)) + p3.b(x, a).dot(p3.exact_grad(x)) -
                         p3.c(x, a) * p3.exact_u(x) - p3.f(x, a);
      CHECK(std::abs(res) <= 1e-10 * (1.0 + std::abs(p3.f(x, a))));
    }
  }

  // With the control grid matching the load's reference grid the sup vanishes
  // identically; with a coarse grid that divides it the sup stays nonpositive.
  auto exact_sup = [&](const HJBProblem& p, const Vec2& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Control& a : p.controls.controls)
      best = std::max(best, p.A(x, a).frob(p.exact_hess(x)) + p.b(x, a).dot(p.exact_grad(x)) -
                                p.c(x, a) * p.exact_u(x) - p.f(x, a));
    return best;
  };
  auto p2same = problem::make_builtin("example2", {16, 16, 16});
  auto p2sub = problem::make_builtin("example2", {8, 8, 64});
  for (int t = 0; t < 20; ++t) {
    const Vec2 x{u01(rng), u01(rng)};
    CHECK(std::abs(exact_sup(p2same, x)) <= 1e-11);
    const double s = exact_sup(p2sub, x);
    CHECK(s <= 1e-11);
    CHECK(s >= -4.0);
  }
}

TEST_CASE("exact derivative callbacks match finite differences") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u01(0.1, 0.9);
  const double h = 2e-6;
  for (const char* name : {"example1", "example2", "example3"}) {
    auto p = name == std::string("example2") ? problem::make_builtin(name, {2, 2, 4})
                                             : problem::make_builtin(name);
    for (int t = 0; t < 10; ++t) {
      Vec2 x{p.domain.xmin + u01(rng) * p.domain.width(),
             p.domain.ymin + u01(rng) * p.domain.height()};
      const Vec2 g = p.exact_grad(x);
      const SymMat2 H = p.exact_hess(x);
      const double fd_gx = (p.exact_u({x.x + h, x.y}) - p.exact_u({x.x - h, x.y})) / (2 * h);
      const double fd_gy = (p.exact_u({x.x, x.y + h}) - p.exact_u({x.x, x.y - h})) / (2 * h);
      CHECK(g.x == doctest::Approx(fd_gx).epsilon(1e-5));
      CHECK(g.y == doctest::Approx(fd_gy).epsilon(1e-5));
      const double fd_xx =
          (p.exact_grad({x.x + h, x.y}).x - p.exact_grad({x.x - h, x.y}).x) / (2 * h);
      const double fd_xy =
          (p.exact_grad({x.x, x.y + h}).x - p.exact_grad({x.x, x.y - h}).x) / (2 * h);
      const double fd_yy =
          (p.exact_grad({x.x, x.y + h}).y - p.exact_grad({x.x, x.y - h}).y) / (2 * h);
      CHECK(H.xx == doctest::Approx(fd_xx).epsilon(2e-5));
      CHECK(H.xy == doctest::Approx(fd_xy).epsilon(2e-5));
      CHECK(H.yy == doctest::Approx(fd_yy).epsilon(2e-5));
    }
  }
}

TEST_CASE("unknown builtin names are rejected") {
  CHECK_THROWS_AS(problem::make_builtin("nope"), std::invalid_argument);
  CHECK_THROWS_AS(problem::make_builtin("example2", {0, 4, 4}), std::invalid_argument);
}
