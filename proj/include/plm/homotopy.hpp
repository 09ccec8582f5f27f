#pragma once

#include "plm/geom.hpp"

namespace plm {

// A split chart read as a vector bundle: the fiber variables span the
// directions scaled by the fiberwise dilation, whose generator is the Euler
// field summing z dz over the fiber.
class BundleChart {
 public:
  explicit BundleChart(ChartPtr chart);

  ChartPtr chart() const { return chart_; }
  int base_dim() const { return chart_->base_dim(); }
  int fiber_dim() const { return chart_->fiber_dim(); }
  Multivector euler() const;

 private:
  ChartPtr chart_;
};

// The raw termwise scaling operator: each monomial term of fiber polynomial
// degree d and fiber form degree j contributes its Euler contraction
// weighted by 1/(d+j), and terms with d+j = 0 contribute nothing.  Together
// with the pullback through the zero section it satisfies
// d(H(a)) + H(d(a)) = a - pullback(a) on polynomial forms.
DiffForm scaling_homotopy(const DiffForm& alpha, const BundleChart& b);

// The zero-section pullback extended back over the bundle: keeps the
// fiber-free terms with coefficients frozen at fiber = 0.
DiffForm zero_section_pullback(const DiffForm& alpha, const BundleChart& b);

// Primitive of a closed polynomial form vanishing on the zero section:
// checks the preconditions, then applies the scaling operator.  The output
// satisfies d(beta) = alpha exactly and vanishes on the zero section.
DiffForm homotopy_primitive(const DiffForm& alpha, const BundleChart& b);

}  // namespace plm
