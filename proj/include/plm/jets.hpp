#pragma once

#include "plm/checks.hpp"
#include "plm/geom.hpp"
#include "plm/numeric.hpp"

namespace plm {

// The vanishing locus of a set of chart variables (its "normal" variables),
// with the remaining variables as a chart on the locus itself.  The normal
// set may be empty (the locus is the whole chart) or full (a single point).
class Submanifold {
 public:
  Submanifold(ChartPtr chart, std::vector<int> normal);

  // all fiber variables of a split chart are the normal set
  static Submanifold zero_section(ChartPtr chart);

  ChartPtr chart() const { return chart_; }
  ChartPtr base_chart() const { return base_; }
  int normal_dim() const { return static_cast<int>(normal_idx_.size()); }
  int tangent_dim() const { return static_cast<int>(tangent_idx_.size()); }
  const std::vector<int>& normal_indices() const { return normal_idx_; }
  const std::vector<int>& tangent_indices() const { return tangent_idx_; }
  bool is_normal(int i) const;

  // set the normal variables to zero and land on the base chart
  ScalarExpr restrict_to_base(const ScalarExpr& f) const;
  // view a base-chart scalar on the ambient chart
  ScalarExpr include_from_base(const ScalarExpr& f) const;

  friend bool operator==(const Submanifold& a, const Submanifold& b) {
    return same_chart(a.chart_, b.chart_) && a.normal_idx_ == b.normal_idx_;
  }

 private:
  ChartPtr chart_;
  ChartPtr base_;
  std::vector<int> normal_idx_;
  std::vector<int> tangent_idx_;
};

// Order of vanishing along the locus: the largest k with f in I^k, where I
// is generated by the normal variables (INT_MAX for zero).  Exact for
// rational coefficients; throws DomainError when a normal variable hides
// inside a function atom or the denominator vanishes along the locus.
int vanishing_order(const ScalarExpr& f, const Submanifold& s);
bool has_exact_vanishing_order(const ScalarExpr& f, const Submanifold& s);

// Exact test for membership in I^k; throws DomainError when the answer is
// not structurally decidable.
bool ideal_membership(const ScalarExpr& f, const Submanifold& s, int k);

// Verdict that f vanishes at least to the given order along the locus;
// exact when possible, otherwise seeded log-slope probes on rays
// (x, eps*z) with eps = 1e-2, 1e-3.
CheckRecord check_vanishing_order(const std::string& name, const ScalarExpr& f,
                                  const Submanifold& s, int order,
                                  uint64_t seed, double tol);

// Every bivector component carrying a normal index must vanish on the locus.
CheckRecord check_poisson_submanifold(const Multivector& pi,
                                      const Submanifold& s, uint64_t seed,
                                      double tol);

// A bivector to first order along a submanifold it is tangent to: stores the
// canonical componentwise representative modulo I^2 (coefficients may stay
// rational in the base variables).  Construction fails on non-tangent input.
class JetClass {
 public:
  JetClass(const Multivector& pi, Submanifold s);

  const Submanifold& submanifold() const { return sub_; }
  const Multivector& representative() const { return rep_; }

  friend bool operator==(const JetClass& a, const JetClass& b) {
    return a.sub_ == b.sub_ && a.rep_ == b.rep_;
  }

 private:
  Submanifold sub_;
  Multivector rep_;
};

JetClass jet_truncate(const Multivector& pi, const Submanifold& s);

// Do two bivectors agree to first order along the locus?
CheckRecord check_same_first_jet(const Multivector& a, const Multivector& b,
                                 const Submanifold& s, uint64_t seed,
                                 double tol);

// [pi, pi] in I^2: the condition on a first jet to extend to a Poisson
// structure to first order.  Reports every offending component.
CheckRecord check_second_order(const Multivector& pi, const Submanifold& s,
                               uint64_t seed, double tol);

// [pi, pi] = 0; exact when the obstruction reduces structurally, otherwise
// seeded numeric sampling of its components.
CheckRecord check_poisson(const Multivector& pi, uint64_t seed, double tol);

}  // namespace plm
