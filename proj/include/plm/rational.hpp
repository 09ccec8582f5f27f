#pragma once
#include <gmpxx.h>
#include <string>

namespace plm {

// Arbitrary-precision rational, always canonicalized (lowest terms, positive
// denominator). gmp's mpq_class maintains that invariant after canonicalize().
using Rational = mpq_class;

inline Rational rat(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline std::string rat_str(const Rational& r) {
  return r.get_str();
}

inline bool rat_is_zero(const Rational& r) { return sgn(r) == 0; }

// strict total order, used for canonical term ordering
inline int rat_cmp(const Rational& a, const Rational& b) { return cmp(a, b); }

}  // namespace plm
