#pragma once

#include <string>
#include <vector>

#include "plm/checks.hpp"
#include "plm/geom.hpp"
#include "plm/jets.hpp"

namespace plm {

// A section of an anchored frame bundle, as coefficients in the frame.
using Section = std::vector<ScalarExpr>;

// An anchored bracket structure in a fixed frame over a chart: anchor
// components rho^i_a, structure functions C^c_{ab} (antisymmetric in the
// lower pair), and optionally a fibrewise 1-form value mu(e_a) per frame
// element.  The bracket of general sections extends the frame values by the
// Leibniz rule through the anchor.
class AlgebroidData {
 public:
  AlgebroidData(ChartPtr base, int rank,
                std::vector<std::vector<ScalarExpr>> anchor,
                std::vector<std::vector<std::vector<ScalarExpr>>> structure,
                std::vector<std::string> frame = {},
                std::vector<std::vector<ScalarExpr>> im = {});

  ChartPtr base() const { return base_; }
  int rank() const { return rank_; }
  const std::string& frame_label(int a) const { return frame_.at(a); }
  bool has_im() const { return !im_.empty(); }

  // C^c_{ab}
  ScalarExpr structure_fn(int a, int b, int c) const;
  ScalarExpr anchor_coeff(int a, int i) const;
  const std::vector<std::vector<ScalarExpr>>& anchor() const { return anchor_; }
  const std::vector<std::vector<ScalarExpr>>& im() const { return im_; }

  Multivector rho(int a) const;  // anchor vector field of a frame element
  DiffForm mu(int a) const;      // 1-form value on a frame element

  Section basis(int a) const;
  Section zero_section() const;
  bool is_zero_section(const Section& s) const;
  std::string section_str(const Section& s) const;

  Multivector anchor_of(const Section& s) const;
  DiffForm mu_of(const Section& s) const;
  Section bracket(const Section& s, const Section& t) const;

 private:
  ChartPtr base_;
  int rank_;
  std::vector<std::vector<ScalarExpr>> anchor_;
  std::vector<std::vector<std::vector<ScalarExpr>>> structure_;
  std::vector<std::string> frame_;
  std::vector<std::vector<ScalarExpr>> im_;
};

// Frame-indexed covariant derivative: gamma[i][a][b] is the e_b coefficient
// of the derivative of e_a along the i-th coordinate field.
class Connection {
 public:
  Connection(ChartPtr base, int rank,
             std::vector<std::vector<std::vector<ScalarExpr>>> gamma);

  static Connection flat(ChartPtr base, int rank);

  ChartPtr base() const { return base_; }
  int rank() const { return rank_; }
  ScalarExpr gamma(int i, int a, int b) const;

  Section nabla(int i, const Section& s) const;
  Section nabla(const Multivector& x, const Section& s) const;

 private:
  ChartPtr base_;
  int rank_;
  std::vector<std::vector<std::vector<ScalarExpr>>> gamma_;
};

// A projection of the frame bundle onto the span of designated frame
// elements: l[a][b] is the e_b coefficient of the image of e_a.  The matrix
// must restrict to the identity on the designated span and land inside it.
class Splitting {
 public:
  Splitting(ChartPtr base, int rank, std::vector<int> kernel,
            std::vector<std::vector<ScalarExpr>> l);

  // the 0/1 matrix projecting onto the designated span
  static Splitting projection(ChartPtr base, int rank,
                              std::vector<int> kernel);

  int rank() const { return rank_; }
  const std::vector<int>& kernel() const { return kernel_; }
  ScalarExpr entry(int a, int b) const;

  Section apply(const Section& s) const;

 private:
  ChartPtr base_;
  int rank_;
  std::vector<int> kernel_;
  std::vector<std::vector<ScalarExpr>> l_;
};

// Restrict the cotangent structure of a first-order jet to its locus: frame
// given by the coordinate differentials (tangent ones first), anchor and
// brackets induced by the jet representative, 1-form values given by
// restriction of the differentials.  Requires the second-order condition.
AlgebroidData jet_to_algebroid(const JetClass& jet);

// Convenience: truncate the bivector to its first-order jet along the locus
// first.
AlgebroidData jet_to_algebroid(const Multivector& pi, const Submanifold& s);

// Anchor morphism + frame Jacobi identity + randomized scaled-section
// probes; all residuals exact.
CheckSet check_jacobi(const AlgebroidData& a, uint64_t seed = 0);

// The two closedness equations of the 1-form values against the anchor and
// bracket, plus randomized scaled-section probes; requires mu data.
CheckSet check_closed_im(const AlgebroidData& a, uint64_t seed = 0);

// Curvature of the coordinate-field action induced by the connection,
// evaluated on frame elements (ea, eb) and the i-th coordinate field.
Section basic_curvature(const AlgebroidData& a, const Connection& conn,
                        int ea, int eb, int i);

// Invariance of the projection under the induced derivative along frame
// elements, and vanishing of the projected curvature.  Both residual
// families must vanish identically.
CheckSet check_cartan_splitting(const AlgebroidData& a, const Connection& conn,
                                const Splitting& l);

}  // namespace plm
