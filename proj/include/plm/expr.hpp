#pragma once
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plm/chart.hpp"
#include "plm/rational.hpp"

namespace plm {

enum class FuncKind : uint8_t { Exp, Sin, Cos };

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised by numeric evaluation when a quotient denominator vanishes at the
// sample point; callers resample.
struct PoleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Forward-mode dual number for the numeric backend.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

class ScalarExpr;

namespace detail {

// Monomial exponent vector over "slots": chart variables first, then function
// atoms. Width is fixed within one ExprImpl.
using ExpVec = std::vector<uint32_t>;

struct GradedLexLess {
  bool operator()(const ExpVec& a, const ExpVec& b) const {
    uint64_t da = 0, db = 0;
    for (auto e : a) da += e;
    for (auto e : b) db += e;
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

using Poly = std::map<ExpVec, Rational, GradedLexLess>;

struct Atom;  // function atom, defined in expr.cpp surroundings

struct Guard {
  int var = -1;                      // the variable whose vanishing is removable
  std::vector<ScalarExpr> taylor;    // T_1..T_6, each free of `var`
};

struct ExprImpl {
  ChartPtr chart;
  std::vector<std::shared_ptr<const Atom>> atoms;  // sorted canonically
  Poly num;
  Poly den;  // nonzero; monic in graded-lex leading coefficient
  std::optional<Guard> guard;
};

struct Atom {
  FuncKind kind;
  // argument stored as a full expression (normalized)
  std::shared_ptr<const ExprImpl> arg;
};

int impl_cmp(const ExprImpl& a, const ExprImpl& b);

}  // namespace detail

// Immutable scalar expression over a chart. Always held in canonical form:
// a reduced fraction of multivariate polynomials over the chart variables and
// opaque elementary-function atoms, coefficients in lowest-term rationals,
// denominator monic, gcd cancelled, unused atoms pruned.
class ScalarExpr {
 public:
  ScalarExpr() = default;  // empty handle; only assignment is valid

  static ScalarExpr constant(ChartPtr chart, Rational c);
  static ScalarExpr constant(ChartPtr chart, long n, long d = 1) {
    return constant(std::move(chart), rat(n, d));
  }
  static ScalarExpr variable(ChartPtr chart, int index);
  static ScalarExpr apply(FuncKind kind, const ScalarExpr& arg);

  // Pinned infix grammar: + - * / ^, integer literals, identifiers resolved in
  // the chart, exp( ) sin( ) cos( ), parentheses, unary minus.
  static ScalarExpr parse(ChartPtr chart, const std::string& src);

  bool valid() const { return static_cast<bool>(p_); }
  ChartPtr chart() const { return p_->chart; }

  ScalarExpr operator-() const;
  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
  ScalarExpr pow(int e) const;

  ScalarExpr& operator+=(const ScalarExpr& o) { return *this = *this + o; }
  ScalarExpr& operator-=(const ScalarExpr& o) { return *this = *this - o; }
  ScalarExpr& operator*=(const ScalarExpr& o) { return *this = *this * o; }

  // Canonicalization entry point. Expressions are kept normalized by
  // construction, so this is the identity; it exists as the documented
  // idempotent hook (normalize(normalize(e)) == normalize(e)).
  const ScalarExpr& normalize() const { return *this; }

  ScalarExpr differentiate(int var) const;

  // Substitute every chart variable by vals[i] (expressions over `target`).
  ScalarExpr substitute(const std::vector<ScalarExpr>& vals, ChartPtr target) const;
  // Substitute a single variable by an expression over the same chart.
  ScalarExpr substitute_var(int var, const ScalarExpr& value) const;

  bool is_zero() const;           // structural zero of the canonical form
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()
  // no quotient part and no elementary-function atoms
  bool is_polynomial() const;
  bool has_function_atoms() const;

  // structural equality of canonical forms; for quotients this is the
  // cross-multiplied polynomial identity (num_a*den_b == num_b*den_a)
  bool equals(const ScalarExpr& o) const;
  friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) { return a.equals(b); }

  // total order for use as container key (structural, canonical)
  int cmp(const ScalarExpr& o) const;

  double eval(std::span<const double> point) const;
  Dual eval_dual(std::span<const Dual> point) const;

  std::string str() const;

  // numerator / denominator as polynomial expressions over the same chart
  ScalarExpr numerator_expr() const;
  ScalarExpr denominator_expr() const;

  // Minimal total degree in the given variable set over the numerator
  // monomials (requires a polynomial expression; zero returns INT_MAX).
  int min_degree_in(const std::vector<int>& vars) const;
  // true when one of the chart variables occurs inside a function-atom
  // argument, where polynomial degree bookkeeping cannot see it
  bool vars_in_atoms(const std::vector<int>& vars) const;
  // Maximal total degree over numerator monomials in the given set.
  int max_degree_in(const std::vector<int>& vars) const;
  // Drop every numerator monomial whose total degree in `vars` is >= cutoff.
  ScalarExpr truncate_degree(const std::vector<int>& vars, int cutoff) const;

  const detail::ExprImpl& impl() const { return *p_; }

 private:
  explicit ScalarExpr(std::shared_ptr<const detail::ExprImpl> p) : p_(std::move(p)) {}
  std::shared_ptr<const detail::ExprImpl> p_;
  friend struct ExprOps;
};

// Convenience: zero/one over a chart.
inline ScalarExpr expr_zero(const ChartPtr& c) { return ScalarExpr::constant(c, 0); }
inline ScalarExpr expr_one(const ChartPtr& c) { return ScalarExpr::constant(c, 1); }

// Decide whether `e` is mathematically zero. Polynomial (atom-free) content is
// decided structurally; expressions with function atoms fall back to seeded
// numeric sampling (`points` samples in [-2,2]^dim, |value| <= tol at every
// point counts as zero). Returns {zero_verdict, exact_path}.
struct ZeroVerdict {
  bool zero = false;
  bool exact = false;      // true when decided structurally
  double witness = 0.0;    // max |value| seen on the numeric path
};
ZeroVerdict zero_verdict(const ScalarExpr& e, uint64_t seed = 0, int points = 32,
                         double tol = 1e-12);

}  // namespace plm
