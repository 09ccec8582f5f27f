#pragma once

#include "plm/coupling.hpp"
#include "plm/jets.hpp"

namespace plm {

// A bivector on a split chart, regular along the zero section, together with
// the polynomial certificate of the invertibility locus it was built on:
// every coefficient denominator divides a power of the certificate, and the
// certificate equals 1 identically on the zero section.
class PoissonModel {
 public:
  PoissonModel(ChartPtr chart, Multivector pi, ScalarExpr certificate);

  ChartPtr chart() const { return chart_; }
  const Multivector& bivector() const { return pi_; }
  const ScalarExpr& certificate() const { return cert_; }
  const Submanifold& zero_section() const { return zero_; }

 private:
  ChartPtr chart_;
  Multivector pi_;
  ScalarExpr cert_;
  Submanifold zero_;
};

// Assemble the model bivector on the dual bundle chart from verified
// coupling data: the base block is the base bivector twisted by the inverse
// of Id + <z,U> (adjugate over determinant, no series truncation), the mixed
// block couples through the connection, and the fibre block carries the
// linear bracket plus the curvature correction.  The fibre variable is named
// t in rank one and z1..zm otherwise.
PoissonModel build_local_model(const CouplingData& c, uint64_t seed = 0,
                               double tol = 1e-9);

// The rank-one closed form: the base block is pi_S twisted by the inverse of
// Id + tU, the mixed block is its sharp of theta wedged with t dt.
PoissonModel build_codim1(const Codim1Triple& t, uint64_t seed = 0,
                          double tol = 1e-9);

// Three checks on a model against the data it should localize: the Jacobi
// identity of the bivector, recovery of the first-order structure along the
// zero section, and tangency to the preimage of each requested coordinate
// subspace of the base (a request is the set of base variables vanishing on
// the subspace).
CheckSet verify_local_model(const PoissonModel& m, const CouplingData& c,
                            const std::vector<std::vector<int>>& leaves = {},
                            uint64_t seed = 0, double tol = 1e-9);

}  // namespace plm
