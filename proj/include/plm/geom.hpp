#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "plm/chart.hpp"
#include "plm/expr.hpp"

namespace plm {

class DiffForm;

// Antisymmetric contravariant tensor field: sum of coeff * ∂_{i1}∧...∧∂_{ip}
// over strictly increasing index tuples.  Degree 0 is a scalar field.
class Multivector {
 public:
  using Terms = std::map<std::vector<int>, ScalarExpr>;

  static Multivector zero(ChartPtr chart, int degree);
  static Multivector scalar(const ScalarExpr& f);
  static Multivector term(const ScalarExpr& coeff, std::vector<int> indices);

  ChartPtr chart() const { return chart_; }
  int degree() const { return degree_; }
  const Terms& terms() const { return terms_; }

  // component for an arbitrary index tuple (sign-adjusted, zero on repeats)
  ScalarExpr component(const std::vector<int>& indices) const;

  bool is_zero() const { return terms_.empty(); }
  bool equals(const Multivector& o) const;
  friend bool operator==(const Multivector& a, const Multivector& b) {
    return a.equals(b);
  }

  Multivector operator-() const;
  friend Multivector operator+(const Multivector& a, const Multivector& b);
  friend Multivector operator-(const Multivector& a, const Multivector& b);
  friend Multivector operator*(const ScalarExpr& f, const Multivector& v);
  friend Multivector operator*(const Rational& c, const Multivector& v);

  Multivector transform_coeffs(
      const std::function<ScalarExpr(const ScalarExpr&)>& fn) const;

  std::string str() const;

 private:
  Multivector(ChartPtr chart, int degree) : chart_(chart), degree_(degree) {}
  void add_term(std::vector<int> idx, const ScalarExpr& coeff);

  ChartPtr chart_;
  int degree_;
  Terms terms_;

  friend Multivector wedge(const Multivector&, const Multivector&);
  friend Multivector schouten(const Multivector&, const Multivector&);
  friend Multivector interior(const DiffForm&, const Multivector&);
  friend class DiffForm;
  friend struct GeomOps;
};

// Antisymmetric covariant tensor field: sum of coeff * dx^{i1}∧...∧dx^{ip}.
class DiffForm {
 public:
  using Terms = std::map<std::vector<int>, ScalarExpr>;

  static DiffForm zero(ChartPtr chart, int degree);
  static DiffForm scalar(const ScalarExpr& f);
  static DiffForm term(const ScalarExpr& coeff, std::vector<int> indices);

  ChartPtr chart() const { return chart_; }
  int degree() const { return degree_; }
  const Terms& terms() const { return terms_; }
  ScalarExpr component(const std::vector<int>& indices) const;

  bool is_zero() const { return terms_.empty(); }
  bool equals(const DiffForm& o) const;
  friend bool operator==(const DiffForm& a, const DiffForm& b) {
    return a.equals(b);
  }

  DiffForm operator-() const;
  friend DiffForm operator+(const DiffForm& a, const DiffForm& b);
  friend DiffForm operator-(const DiffForm& a, const DiffForm& b);
  friend DiffForm operator*(const ScalarExpr& f, const DiffForm& w);
  friend DiffForm operator*(const Rational& c, const DiffForm& w);

  DiffForm transform_coeffs(
      const std::function<ScalarExpr(const ScalarExpr&)>& fn) const;

  std::string str() const;

 private:
  DiffForm(ChartPtr chart, int degree) : chart_(chart), degree_(degree) {}
  void add_term(std::vector<int> idx, const ScalarExpr& coeff);

  ChartPtr chart_;
  int degree_;
  Terms terms_;

  friend DiffForm wedge(const DiffForm&, const DiffForm&);
  friend DiffForm d(const DiffForm&);
  friend DiffForm interior(const Multivector&, const DiffForm&);
  friend class Multivector;
  friend struct GeomOps;
};

Multivector wedge(const Multivector& a, const Multivector& b);
DiffForm wedge(const DiffForm& a, const DiffForm& b);

// exterior derivative
DiffForm d(const DiffForm& w);

// first-slot contractions: with pi = ∂x∧∂y, interior(dx, pi) = ∂y
Multivector interior(const DiffForm& alpha, const Multivector& v);
DiffForm interior(const Multivector& x, const DiffForm& w);

// anchor of a bivector: sharp(pi, alpha) = interior(alpha, pi)
Multivector sharp(const Multivector& pi, const DiffForm& alpha);

// pi(alpha, beta) for a bivector and two 1-forms
ScalarExpr pairing(const Multivector& pi, const DiffForm& alpha,
                   const DiffForm& beta);

// {f, g} = pi(df, dg)
ScalarExpr poisson_bracket(const Multivector& pi, const ScalarExpr& f,
                           const ScalarExpr& g);

// Schouten bracket of multivectors; [X, f] = X(f), [X, Y] = Lie bracket,
// and [pi, pi] = 0 exactly when the bivector pi is Poisson.
Multivector schouten(const Multivector& a, const Multivector& b);

// Lie derivatives along a vector field
DiffForm lie(const Multivector& x, const DiffForm& w);
Multivector lie(const Multivector& x, const Multivector& v);

// Koszul bracket of 1-forms: [a, b] = L_{pi#a} b - L_{pi#b} a - d(pi(a, b))
DiffForm cotangent_bracket(const Multivector& pi, const DiffForm& alpha,
                           const DiffForm& beta);

// d of a scalar field as a 1-form
DiffForm differential(const ScalarExpr& f);

// Smooth map between charts: one target-coordinate expression per target
// variable, written in source-chart variables.
class SmoothMap {
 public:
  SmoothMap(ChartPtr source, ChartPtr target,
            std::vector<ScalarExpr> components);

  static SmoothMap identity(ChartPtr chart);

  ChartPtr source() const { return source_; }
  ChartPtr target() const { return target_; }
  const std::vector<ScalarExpr>& components() const { return comps_; }

  // precompose a target-chart scalar with the map
  ScalarExpr apply(const ScalarExpr& f) const;
  // numeric image of a source point
  std::vector<double> eval(std::span<const double> point) const;

  DiffForm pullback(const DiffForm& w) const;

  // (g . f)(x) = g(f(x)); f.then(g)
  SmoothMap then(const SmoothMap& g) const;

 private:
  ChartPtr source_;
  ChartPtr target_;
  std::vector<ScalarExpr> comps_;
};

}  // namespace plm
