#include "plm/homotopy.hpp"

#include <string>
#include <utility>
#include <vector>

#include "plm/jets.hpp"

namespace plm {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

std::vector<int> fiber_vars(const ChartPtr& c) {
  std::vector<int> out;
  for (int i = c->base_dim(); i < c->dim(); ++i) out.push_back(i);
  return out;
}

}  // namespace

BundleChart::BundleChart(ChartPtr chart) : chart_(std::move(chart)) {
  require(chart_ && chart_->has_split(),
          "bundle chart needs a base/fiber split");
  require(chart_->fiber_dim() > 0, "bundle chart needs a nonempty fiber set");
}

Multivector BundleChart::euler() const {
  Multivector y = Multivector::zero(chart_, 1);
  for (int i = chart_->base_dim(); i < chart_->dim(); ++i)
    y = y + Multivector::term(ScalarExpr::variable(chart_, i), {i});
  return y;
}

DiffForm scaling_homotopy(const DiffForm& alpha, const BundleChart& b) {
  ChartPtr chart = b.chart();
  require(same_chart(alpha.chart(), chart), "form lives on a different chart");
  require(alpha.degree() >= 1, "the scaling operator needs positive degree");
  const std::vector<int> fv = fiber_vars(chart);
  const Multivector y = b.euler();

  DiffForm out = DiffForm::zero(chart, alpha.degree() - 1);
  for (const auto& [idx, coeff] : alpha.terms()) {
    int j = 0;
    for (int i : idx)
      if (chart->is_fiber(i)) ++j;
    const int dmax = coeff.max_degree_in(fv);
    for (int deg = 0; deg <= dmax; ++deg) {
      if (deg + j == 0) continue;
      ScalarExpr piece =
          coeff.truncate_degree(fv, deg + 1) - coeff.truncate_degree(fv, deg);
      if (piece.is_zero()) continue;
      ScalarExpr weighted = piece * ScalarExpr::constant(chart, 1, deg + j);
      out = out + interior(y, DiffForm::term(weighted, idx));
    }
  }
  return out;
}

DiffForm zero_section_pullback(const DiffForm& alpha, const BundleChart& b) {
  ChartPtr chart = b.chart();
  require(same_chart(alpha.chart(), chart), "form lives on a different chart");
  Submanifold zs = Submanifold::zero_section(chart);
  DiffForm out = DiffForm::zero(chart, alpha.degree());
  for (const auto& [idx, coeff] : alpha.terms()) {
    bool base_only = true;
    for (int i : idx)
      if (chart->is_fiber(i)) base_only = false;
    if (!base_only) continue;
    ScalarExpr frozen = zs.include_from_base(zs.restrict_to_base(coeff));
    out = out + DiffForm::term(frozen, idx);
  }
  return out;
}

DiffForm homotopy_primitive(const DiffForm& alpha, const BundleChart& b) {
  require(same_chart(alpha.chart(), b.chart()),
          "form lives on a different chart");
  require(alpha.degree() >= 1, "primitive needs a form of positive degree");
  for (const auto& [idx, coeff] : alpha.terms())
    require(coeff.is_polynomial() && !coeff.has_function_atoms(),
            "primitive needs polynomial coefficients");
  require(d(alpha).is_zero(), "primitive needs a closed form");
  require(zero_section_pullback(alpha, b).is_zero(),
          "form does not vanish on the zero section");
  return scaling_homotopy(alpha, b);
}

}  // namespace plm
