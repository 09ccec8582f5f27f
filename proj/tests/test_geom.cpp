#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plm/geom.hpp"
#include "test_util.hpp"

using namespace plm;
using namespace plmtest;

namespace {

ChartPtr xyz() { return Chart::make({"x", "y", "z"}); }

ScalarExpr ex(ChartPtr c, const std::string& s) {
  return ScalarExpr::parse(c, s);
}

// coordinate Lie bracket of vector fields, as an independent oracle
Multivector lie_bracket_direct(const Multivector& x, const Multivector& y) {
  auto chart = x.chart();
  auto r = Multivector::zero(chart, 1);
  for (int j = 0; j < chart->dim(); ++j) {
    ScalarExpr c = expr_zero(chart);
    for (int i = 0; i < chart->dim(); ++i)
      c = c + x.component({i}) * y.component({j}).differentiate(i) -
          y.component({i}) * x.component({j}).differentiate(i);
    if (!c.is_zero()) r = r + Multivector::term(c, {j});
  }
  return r;
}

}  // namespace

TEST_CASE("wedge: anticommutativity, components, scalar factor") {
  auto c = xyz();
  auto X = Multivector::term(ex(c, "x + y"), {0});
  auto Y = Multivector::term(ex(c, "z^2"), {1});
  CHECK(wedge(X, Y) == -wedge(Y, X));
  auto XY = wedge(X, Y);
  CHECK(XY.component({0, 1}).equals(ex(c, "x*z^2 + y*z^2")));
  CHECK(XY.component({1, 0}).equals(ex(c, "-x*z^2 - y*z^2")));
  CHECK(XY.component({1, 1}).is_zero());
  auto f = ex(c, "x*y");
  CHECK(wedge(Multivector::scalar(f), Y) == f * Y);
  CHECK(wedge(X, X).is_zero());
}

TEST_CASE("wedge: associativity and graded commutativity on random tensors") {
  auto c = Chart::make({"x", "y", "z", "w"});
  Rng rng(2024);
  for (int t = 0; t < 40; ++t) {
    int p = 1 + static_cast<int>(rng.below(2));
    int q = 1 + static_cast<int>(rng.below(2));
    int r = 1 + static_cast<int>(rng.below(2));
    auto A = random_mv(c, rng, p), B = random_mv(c, rng, q),
         C = random_mv(c, rng, r);
    CHECK(wedge(wedge(A, B), C) == wedge(A, wedge(B, C)));
    auto BA = wedge(B, A);
    CHECK(wedge(A, B) == ((p * q) % 2 == 1 ? -BA : BA));
  }
}

TEST_CASE("schouten: quadratic bivector reproduces its cubic obstruction") {
  auto c = xyz();
  // z ∂x∧∂y + x*z ∂x∧∂z
  auto pi = Multivector::term(ex(c, "z"), {0, 1}) +
            Multivector::term(ex(c, "x*z"), {0, 2});
  auto br = schouten(pi, pi);
  auto expected = Multivector::term(ex(c, "2*z^2"), {0, 1, 2});
  CHECK(br == expected);
  CHECK_FALSE(br.is_zero());
}

TEST_CASE("schouten: rotation-invariant linear bivector is Poisson") {
  auto c = xyz();
  // z ∂x∧∂y + x ∂y∧∂z + y ∂z∧∂x
  auto pi = Multivector::term(ex(c, "z"), {0, 1}) +
            Multivector::term(ex(c, "x"), {1, 2}) +
            Multivector::term(ex(c, "-y"), {0, 2});
  CHECK(schouten(pi, pi).is_zero());
  // constant-rank symplectic block too
  auto sp = Multivector::term(expr_one(c), {0, 1});
  CHECK(schouten(sp, sp).is_zero());
}

TEST_CASE("schouten: degree 0 and 1 specializations") {
  auto c = xyz();
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    auto X = random_mv(c, rng, 1);
    auto Y = random_mv(c, rng, 1);
    auto f = random_poly(c, rng);
    auto g = random_poly(c, rng);
    // [X, f] = X(f), [f, g] = 0, [X, Y] = Lie bracket
    ScalarExpr xf = expr_zero(c);
    for (int i = 0; i < 3; ++i)
      xf = xf + X.component({i}) * f.differentiate(i);
    CHECK(schouten(X, Multivector::scalar(f)) == Multivector::scalar(xf));
    CHECK(schouten(Multivector::scalar(f), Multivector::scalar(g)).is_zero());
    CHECK(schouten(X, Y) == lie_bracket_direct(X, Y));
  }
}

TEST_CASE("schouten: graded antisymmetry") {
  auto c = xyz();
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    int p = 1 + static_cast<int>(rng.below(3));
    int q = 1 + static_cast<int>(rng.below(3));
    auto A = random_mv(c, rng, p), B = random_mv(c, rng, q);
    auto lhs = schouten(A, B);
    auto rhs = schouten(B, A);
    bool flip = ((p - 1) * (q - 1)) % 2 == 1;
    CHECK(lhs == (flip ? rhs : -rhs));
  }
}

TEST_CASE("schouten: graded Leibniz over the wedge") {
  auto c = xyz();
  Rng rng(13);
  for (int t = 0; t < 40; ++t) {
    int p = 1 + static_cast<int>(rng.below(2));
    int q = static_cast<int>(rng.below(2));
    int r = 1 + static_cast<int>(rng.below(2));
    auto A = random_mv(c, rng, p);
    auto B = q == 0 ? Multivector::scalar(random_poly(c, rng, 2, 2))
                    : random_mv(c, rng, q);
    auto C = random_mv(c, rng, r);
    auto lhs = schouten(A, wedge(B, C));
    auto rhs1 = wedge(schouten(A, B), C);
    auto rhs2 = wedge(B, schouten(A, C));
    bool flip = ((p - 1) * q) % 2 == 1;
    CHECK(lhs == rhs1 + (flip ? -rhs2 : rhs2));
  }
}

TEST_CASE("schouten: graded Jacobi") {
  auto c = xyz();
  Rng rng(17);
  for (int t = 0; t < 25; ++t) {
    int p = 1 + static_cast<int>(rng.below(2));
    int q = 1 + static_cast<int>(rng.below(2));
    int r = 1 + static_cast<int>(rng.below(2));
    auto A = random_mv(c, rng, p, 1), B = random_mv(c, rng, q, 1),
         C = random_mv(c, rng, r, 1);
    auto j1 = schouten(A, schouten(B, C));
    auto j2 = schouten(B, schouten(C, A));
    auto j3 = schouten(C, schouten(A, B));
    auto s1 = ((p - 1) * (r - 1)) % 2 == 1 ? -j1 : j1;
    auto s2 = ((q - 1) * (p - 1)) % 2 == 1 ? -j2 : j2;
    auto s3 = ((r - 1) * (q - 1)) % 2 == 1 ? -j3 : j3;
    CHECK((s1 + s2 + s3).is_zero());
  }
}

TEST_CASE("exterior derivative: pinned values, d^2 = 0, antiderivation") {
  auto c = xyz();
  auto w = DiffForm::term(ex(c, "x*y"), {2});
  auto dw = d(w);
  CHECK(dw.component({0, 2}).equals(ex(c, "y")));
  CHECK(dw.component({1, 2}).equals(ex(c, "x")));
  CHECK(dw.component({0, 1}).is_zero());

  Rng rng(19);
  for (int t = 0; t < 30; ++t) {
    int q = static_cast<int>(rng.below(3));
    auto a = q == 0 ? DiffForm::scalar(random_poly(c, rng))
                    : random_form(c, rng, q);
    CHECK(d(d(a)).is_zero());
    int r = 1;
    auto b = random_form(c, rng, r);
    auto lhs = d(wedge(a, b));
    auto rhs = wedge(d(a), b) + (q % 2 == 1 ? -wedge(a, d(b)) : wedge(a, d(b)));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("interior product: first-slot convention and antisymmetry") {
  auto c = xyz();
  auto pi = Multivector::term(expr_one(c), {0, 1});  // ∂x∧∂y
  auto dx = DiffForm::term(expr_one(c), {0});
  auto dy = DiffForm::term(expr_one(c), {1});
  CHECK(sharp(pi, dx) == Multivector::term(expr_one(c), {1}));   // ∂y
  CHECK(sharp(pi, dy) == -Multivector::term(expr_one(c), {0}));  // -∂x

  Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    auto V = random_mv(c, rng, 2 + static_cast<int>(rng.below(2)));
    auto al = random_form(c, rng, 1);
    auto be = random_form(c, rng, 1);
    CHECK(interior(al, interior(be, V)) == -interior(be, interior(al, V)));
    auto piR = random_mv(c, rng, 2);
    CHECK((pairing(piR, al, be) + pairing(piR, be, al)).is_zero());
  }
}

TEST_CASE("lie derivative: Cartan identities") {
  auto c = xyz();
  Rng rng(29);
  for (int t = 0; t < 25; ++t) {
    auto X = random_mv(c, rng, 1, 1);
    auto Y = random_mv(c, rng, 1, 1);
    auto f = random_poly(c, rng, 2, 2);
    ScalarExpr xf = expr_zero(c);
    for (int i = 0; i < 3; ++i)
      xf = xf + X.component({i}) * f.differentiate(i);
    CHECK(lie(X, DiffForm::scalar(f)) == DiffForm::scalar(xf));

    int q = 1 + static_cast<int>(rng.below(2));
    auto w = random_form(c, rng, q, 1);
    // [L_X, i_Y] = i_{[X,Y]}
    auto lhs = lie(X, interior(Y, w)) - interior(Y, lie(X, w));
    auto rhs = interior(schouten(X, Y), w);
    CHECK(lhs == rhs);
    // L_X d = d L_X
    CHECK(d(lie(X, w)) == lie(X, d(w)));
  }
}

TEST_CASE("cotangent bracket: differentials and Leibniz") {
  auto c = xyz();
  Rng rng(31);
  for (int t = 0; t < 25; ++t) {
    auto pi = random_mv(c, rng, 2);
    auto f = random_poly(c, rng, 2, 2);
    auto g = random_poly(c, rng, 2, 2);
    // [df, dg] = d{f, g} for any bivector
    CHECK(cotangent_bracket(pi, differential(f), differential(g)) ==
          differential(poisson_bracket(pi, f, g)));
    // [a, f b] = f [a, b] + (pi#a)(f) b
    auto al = random_form(c, rng, 1, 1);
    auto be = random_form(c, rng, 1, 1);
    auto lhs = cotangent_bracket(pi, al, f * be);
    ScalarExpr af = expr_zero(c);
    auto pa = sharp(pi, al);
    for (int i = 0; i < 3; ++i)
      af = af + pa.component({i}) * f.differentiate(i);
    auto rhs = f * cotangent_bracket(pi, al, be) + af * be;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("cotangent bracket: Jacobi holds iff the bivector is Poisson") {
  auto c = xyz();
  auto so3 = Multivector::term(ex(c, "z"), {0, 1}) +
             Multivector::term(ex(c, "x"), {1, 2}) +
             Multivector::term(ex(c, "-y"), {0, 2});
  auto bad = Multivector::term(ex(c, "z"), {0, 1}) +
             Multivector::term(ex(c, "x*z"), {0, 2});
  auto jac = [&](const Multivector& pi, const DiffForm& a, const DiffForm& b,
                 const DiffForm& g) {
    return cotangent_bracket(pi, cotangent_bracket(pi, a, b), g) +
           cotangent_bracket(pi, cotangent_bracket(pi, b, g), a) +
           cotangent_bracket(pi, cotangent_bracket(pi, g, a), b);
  };
  Rng rng(37);
  for (int t = 0; t < 10; ++t) {
    auto a = random_form(c, rng, 1, 1);
    auto b = random_form(c, rng, 1, 1);
    auto g = random_form(c, rng, 1, 1);
    CHECK(jac(so3, a, b, g).is_zero());
  }
  auto dx = DiffForm::term(expr_one(c), {0});
  auto dy = DiffForm::term(expr_one(c), {1});
  auto dz = DiffForm::term(expr_one(c), {2});
  CHECK_FALSE(jac(bad, dx, dy, dz).is_zero());
}

TEST_CASE("pullback: pinned value, naturality, functoriality") {
  auto uv = Chart::make({"u", "v"});
  auto c = xyz();
  // (u, v) -> (u^2, u + v, u*v)
  SmoothMap phi(uv, c,
                {ex(uv, "u^2"), ex(uv, "u + v"), ex(uv, "u*v")});
  auto dxdy = DiffForm::term(expr_one(c), {0, 1});
  auto pb = phi.pullback(dxdy);
  CHECK(pb.component({0, 1}).equals(ex(uv, "2*u")));

  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    int q = 1 + static_cast<int>(rng.below(2));
    auto w = random_form(c, rng, q, 1);
    auto e = random_form(c, rng, 1, 1);
    CHECK(phi.pullback(d(w)) == d(phi.pullback(w)));
    CHECK(phi.pullback(wedge(w, e)) ==
          wedge(phi.pullback(w), phi.pullback(e)));
  }

  auto ab = Chart::make({"a", "b"});
  SmoothMap psi(ab, uv, {ex(ab, "a + b"), ex(ab, "a*b")});
  auto once = psi.then(phi);
  for (int t = 0; t < 10; ++t) {
    auto w = random_form(c, rng, 1);
    CHECK(once.pullback(w) == psi.pullback(phi.pullback(w)));
  }
}

TEST_CASE("smooth map: numeric evaluation matches substitution") {
  auto uv = Chart::make({"u", "v"});
  auto c = xyz();
  SmoothMap phi(uv, c,
                {ScalarExpr::parse(uv, "u*v"), ScalarExpr::parse(uv, "u - v"),
                 ScalarExpr::apply(FuncKind::Sin, ScalarExpr::variable(uv, 0))});
  Rng rng(43);
  for (int t = 0; t < 20; ++t) {
    auto f = random_expr(c, rng, false, true);
    auto p = random_point(2, rng);
    auto img = phi.eval(p);
    CHECK(phi.apply(f).eval(p) ==
          doctest::Approx(f.eval(img)).epsilon(1e-10));
  }
}
