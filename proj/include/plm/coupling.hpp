#pragma once

#include <cstdint>
#include <vector>

#include "plm/algebroid.hpp"
#include "plm/checks.hpp"
#include "plm/geom.hpp"

namespace plm {

// A Poisson bivector on the base, a fibrewise Lie bracket on a trivial
// rank-m bundle, a connection on that bundle, and a coupling tensor.
// u[i][a][j] is the e_a coefficient of U(dx^i, ∂x^j); the same data read
// against a fibre covector z gives the endomorphism ⟨z,U⟩ of the cotangent
// sheaf of the base.
class CouplingData {
 public:
  CouplingData(ChartPtr base, Multivector pi_s, int rank,
               std::vector<std::vector<std::vector<ScalarExpr>>> structure,
               std::vector<std::vector<std::vector<ScalarExpr>>> gamma,
               std::vector<std::vector<std::vector<ScalarExpr>>> u);

  ChartPtr base() const { return fibre_.base(); }
  int rank() const { return fibre_.rank(); }
  const Multivector& pi_s() const { return pi_s_; }
  // zero-anchor carrier of the fibrewise bracket
  const AlgebroidData& fibre() const { return fibre_; }
  const Connection& connection() const { return conn_; }

  ScalarExpr structure_fn(int a, int b, int c) const {
    return fibre_.structure_fn(a, b, c);
  }
  ScalarExpr gamma(int i, int a, int b) const { return conn_.gamma(i, a, b); }
  ScalarExpr u(int i, int a, int j) const;

  // U(alpha, x) as a section of the kernel bundle, for 1-form alpha and
  // vector field x
  Section u_eval(const DiffForm& alpha, const Multivector& x) const;

 private:
  Multivector pi_s_;
  AlgebroidData fibre_;
  Connection conn_;
  std::vector<std::vector<std::vector<ScalarExpr>>> u_;
};

// The four structure equations tying (∇, U) to the base bivector: bracket
// invariance of the connection, its curvature expressed through U, the mixed
// cocycle equation, and the skew pairing of U with the bivector.  Exact for
// polynomial data; residuals carrying function atoms fall back to seeded
// numeric sampling.
CheckSet check_coupling(const CouplingData& c, uint64_t seed = 0,
                        double tol = 1e-9);

// Rank-one candidate data, all living on the base chart: bivector pi_s,
// vector field v, bivector lambda0, connection 1-form theta, vector field z,
// and an endomorphism of the cotangent sheaf (u[i][j] is the dx^j coefficient
// of U(dx^i)).
class Codim1Triple {
 public:
  Codim1Triple(ChartPtr base, Multivector pi_s, Multivector v,
               Multivector lambda0, DiffForm theta, Multivector z,
               std::vector<std::vector<ScalarExpr>> u);

  ChartPtr base() const { return base_; }
  const Multivector& pi_s() const { return pi_s_; }
  const Multivector& v() const { return v_; }
  const Multivector& lambda0() const { return lambda0_; }
  const DiffForm& theta() const { return theta_; }
  const Multivector& z() const { return z_; }
  const std::vector<std::vector<ScalarExpr>>& u() const { return u_; }

  DiffForm u_of(const DiffForm& alpha) const;

 private:
  ChartPtr base_;
  Multivector pi_s_;
  Multivector v_;
  Multivector lambda0_;
  DiffForm theta_;
  Multivector z_;
  std::vector<std::vector<ScalarExpr>> u_;
};

// Verifies pi_s#(theta) = v, the splitting of the transgression bivector
// into lambda0 plus the Lichnerowicz differential of z, the leafwise
// closedness of theta (S2''), and the mixed cocycle equation (S3'').
CheckSet check_codim1_triple(const Codim1Triple& t, uint64_t seed = 0,
                             double tol = 1e-9);

// Rank-one coupling data with abelian fibre bracket, connection coefficients
// theta_i, and the triple's endomorphism as coupling tensor.  The triple is
// verified first; a failing triple is a domain error.
CouplingData couplingdata_from_codim1(const Codim1Triple& t, uint64_t seed = 0,
                                      double tol = 1e-9);

}  // namespace plm
