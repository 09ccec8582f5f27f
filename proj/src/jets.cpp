#include "plm/jets.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

namespace plm {

namespace {

std::string idx_str(const std::vector<int>& idx) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
  os << ")";
  return os.str();
}

}  // namespace

Submanifold::Submanifold(ChartPtr chart, std::vector<int> normal)
    : chart_(chart), normal_idx_(std::move(normal)) {
  std::sort(normal_idx_.begin(), normal_idx_.end());
  for (size_t i = 0; i < normal_idx_.size(); ++i) {
    if (normal_idx_[i] < 0 || normal_idx_[i] >= chart_->dim())
      throw DomainError("normal index out of range");
    if (i > 0 && normal_idx_[i] == normal_idx_[i - 1])
      throw DomainError("duplicate normal index");
  }
  std::vector<std::string> names;
  for (int i = 0; i < chart_->dim(); ++i) {
    if (std::binary_search(normal_idx_.begin(), normal_idx_.end(), i)) continue;
    tangent_idx_.push_back(i);
    names.push_back(chart_->name(i));
  }
  base_ = Chart::make(names);
}

Submanifold Submanifold::zero_section(ChartPtr chart) {
  if (!chart->has_split())
    throw DomainError("zero section needs a split chart");
  std::vector<int> normal;
  for (int i = chart->base_dim(); i < chart->dim(); ++i) normal.push_back(i);
  return Submanifold(std::move(chart), std::move(normal));
}

bool Submanifold::is_normal(int i) const {
  return std::binary_search(normal_idx_.begin(), normal_idx_.end(), i);
}

ScalarExpr Submanifold::restrict_to_base(const ScalarExpr& f) const {
  if (!same_chart(f.chart(), chart_))
    throw DomainError("expression lives on a different chart");
  std::vector<ScalarExpr> vals(chart_->dim(), expr_zero(base_));
  for (size_t p = 0; p < tangent_idx_.size(); ++p)
    vals[tangent_idx_[p]] = ScalarExpr::variable(base_, static_cast<int>(p));
  return f.substitute(vals, base_);
}

ScalarExpr Submanifold::include_from_base(const ScalarExpr& f) const {
  if (!same_chart(f.chart(), base_))
    throw DomainError("expression lives on a different chart");
  std::vector<ScalarExpr> vals;
  for (int i : tangent_idx_) vals.push_back(ScalarExpr::variable(chart_, i));
  return f.substitute(vals, chart_);
}

bool has_exact_vanishing_order(const ScalarExpr& f, const Submanifold& s) {
  if (!same_chart(f.chart(), s.chart())) return false;
  if (f.vars_in_atoms(s.normal_indices())) return false;
  if (f.is_zero()) return true;
  return f.denominator_expr().min_degree_in(s.normal_indices()) == 0;
}

int vanishing_order(const ScalarExpr& f, const Submanifold& s) {
  if (!same_chart(f.chart(), s.chart()))
    throw DomainError("expression lives on a different chart");
  if (f.is_zero()) return INT_MAX;
  if (f.vars_in_atoms(s.normal_indices()))
    throw DomainError("normal variable inside a function atom");
  if (f.denominator_expr().min_degree_in(s.normal_indices()) > 0)
    throw DomainError("denominator vanishes along the locus");
  return f.numerator_expr().min_degree_in(s.normal_indices());
}

bool ideal_membership(const ScalarExpr& f, const Submanifold& s, int k) {
  if (k <= 0) return true;
  return vanishing_order(f, s) >= k;
}

CheckRecord check_vanishing_order(const std::string& name, const ScalarExpr& f,
                                  const Submanifold& s, int order,
                                  uint64_t seed, double tol) {
  CheckRecord rec;
  rec.name = name;
  if (has_exact_vanishing_order(f, s)) {
    int got = vanishing_order(f, s);
    rec.exact = true;
    rec.pass = got >= order;
    std::ostringstream os;
    os << "order " << (got == INT_MAX ? std::string("inf") : std::to_string(got))
       << ", need >= " << order;
    rec.details = os.str();
    return rec;
  }
  rec.exact = false;
  Rng rng = Rng::stream(seed, 0x6a65);
  const double e1 = 1e-2, e2 = 1e-3;
  const int n = s.chart()->dim();
  int used = 0;
  for (int t = 0; t < 200 && used < 24; ++t) {
    std::vector<double> p1(n), p2(n);
    for (int i : s.tangent_indices()) p1[i] = p2[i] = rng.uniform(-1.5, 1.5);
    for (int i : s.normal_indices()) {
      double z = rng.uniform(-1.0, 1.0);
      p1[i] = e1 * z;
      p2[i] = e2 * z;
    }
    double v1, v2;
    try {
      v1 = f.eval(p1);
      v2 = f.eval(p2);
    } catch (const PoleError&) {
      continue;
    }
    ++used;
    double floor = tol > 0 ? tol : 1e-13;
    if (std::abs(v1) < floor && std::abs(v2) < floor) continue;
    if (std::abs(v2) < 1e-300) continue;
    double slope = std::log10(std::abs(v1) / std::abs(v2));
    if (slope < static_cast<double>(order) - 0.3) {
      std::ostringstream os;
      os << "decay exponent " << slope << " < " << order
         << " along a sampled ray";
      rec.details = os.str();
      rec.pass = false;
      return rec;
    }
  }
  rec.pass = true;
  std::ostringstream os;
  os << "decay exponent >= " << order << " on " << used << " sampled rays";
  rec.details = os.str();
  return rec;
}

CheckRecord check_poisson_submanifold(const Multivector& pi,
                                      const Submanifold& s, uint64_t seed,
                                      double tol) {
  CheckRecord rec;
  rec.name = "poisson-submanifold";
  rec.pass = true;
  for (const auto& [idx, coeff] : pi.terms()) {
    bool touches_normal = false;
    for (int i : idx) touches_normal |= s.is_normal(i);
    if (!touches_normal) continue;
    CheckRecord one = check_vanishing_order("component " + idx_str(idx), coeff,
                                            s, 1, seed, tol);
    rec.exact = rec.exact && one.exact;
    if (!one.pass) {
      rec.pass = false;
      rec.details = one.name + ": " + one.details;
      return rec;
    }
  }
  rec.details = "conormal components vanish along the locus";
  return rec;
}

namespace {

// homogeneous slice in the normal variables; truncate_degree keeps monomials
// of degree strictly below the cutoff (the mod-I^k representative)
ScalarExpr normal_part(const ScalarExpr& f, const std::vector<int>& normal,
                       int k) {
  ScalarExpr upto = f.truncate_degree(normal, k + 1);
  if (k == 0) return upto;
  return upto - f.truncate_degree(normal, k);
}

}  // namespace

namespace {

Multivector first_jet_representative(const Multivector& pi,
                                     const Submanifold& s) {
  if (!same_chart(pi.chart(), s.chart()))
    throw DomainError("bivector lives on a different chart");
  if (pi.degree() != 2) throw DomainError("jet input must be a bivector");
  const auto& normal = s.normal_indices();
  for (const auto& [idx, coeff] : pi.terms()) {
    bool touches_normal = false;
    for (int i : idx) touches_normal |= s.is_normal(i);
    if (!touches_normal) continue;
    if (!has_exact_vanishing_order(coeff, s) || vanishing_order(coeff, s) < 1)
      throw DomainError("bivector is not tangent to the locus: component " +
                        idx_str(idx) + " does not vanish along it");
  }
  return pi.transform_coeffs([&](const ScalarExpr& c) -> ScalarExpr {
    if (c.vars_in_atoms(normal))
      throw DomainError("normal variable inside a function atom");
    ScalarExpr n = c.numerator_expr();
    ScalarExpr d = c.denominator_expr();
    if (d.min_degree_in(normal) > 0)
      throw DomainError("denominator vanishes along the locus");
    // (n0 + n1 + ...)/(d0 + d1 + ...) = n0/d0 + (n1 d0 - n0 d1)/d0^2 + O(2)
    ScalarExpr n0 = normal_part(n, normal, 0), n1 = normal_part(n, normal, 1);
    ScalarExpr d0 = normal_part(d, normal, 0), d1 = normal_part(d, normal, 1);
    return n0 / d0 + (n1 * d0 - n0 * d1) / (d0 * d0);
  });
}

}  // namespace

JetClass::JetClass(const Multivector& pi, Submanifold s)
    : sub_(std::move(s)), rep_(first_jet_representative(pi, sub_)) {}

JetClass jet_truncate(const Multivector& pi, const Submanifold& s) {
  return JetClass(pi, s);
}

CheckRecord check_same_first_jet(const Multivector& a, const Multivector& b,
                                 const Submanifold& s, uint64_t seed,
                                 double tol) {
  CheckRecord rec;
  rec.name = "same-first-jet";
  if (!same_chart(a.chart(), s.chart()) || !same_chart(b.chart(), s.chart()) ||
      a.degree() != b.degree()) {
    rec.pass = false;
    rec.details = "mismatched charts or degrees";
    return rec;
  }
  rec.pass = true;
  std::vector<std::vector<int>> keys;
  for (const auto& [idx, c] : a.terms()) keys.push_back(idx);
  for (const auto& [idx, c] : b.terms())
    if (a.terms().find(idx) == a.terms().end()) keys.push_back(idx);
  for (const auto& idx : keys) {
    ScalarExpr delta = a.component(idx) - b.component(idx);
    if (delta.is_zero()) continue;
    CheckRecord one = check_vanishing_order("component " + idx_str(idx), delta,
                                            s, 2, seed, tol);
    rec.exact = rec.exact && one.exact;
    if (!one.pass) {
      rec.pass = false;
      rec.details = one.name + ": " + one.details;
      return rec;
    }
  }
  rec.details = "difference vanishes to second order along the locus";
  return rec;
}

CheckRecord check_second_order(const Multivector& pi, const Submanifold& s,
                               uint64_t seed, double tol) {
  CheckRecord rec;
  rec.name = "second-order";
  rec.pass = true;
  Multivector obstruction = schouten(pi, pi);
  std::ostringstream bad;
  int nbad = 0;
  for (const auto& [idx, coeff] : obstruction.terms()) {
    CheckRecord one = check_vanishing_order("component " + idx_str(idx), coeff,
                                            s, 2, seed, tol);
    rec.exact = rec.exact && one.exact;
    if (!one.pass) {
      rec.pass = false;
      if (nbad++) bad << "; ";
      bad << "[pi,pi] component " << idx_str(idx) << " = " << coeff.str();
    }
  }
  rec.details = rec.pass ? "[pi,pi] vanishes to second order along the locus"
                         : bad.str();
  return rec;
}

CheckRecord check_poisson(const Multivector& pi, uint64_t seed, double tol) {
  CheckRecord rec;
  rec.name = "poisson";
  rec.pass = true;
  Multivector obstruction = schouten(pi, pi);
  for (const auto& [idx, coeff] : obstruction.terms()) {
    ZeroVerdict v = zero_verdict(coeff, seed, 32, tol);
    rec.exact = rec.exact && v.exact;
    if (!v.zero) {
      rec.pass = false;
      rec.details =
          "[pi,pi] component " + idx_str(idx) + " = " + coeff.str();
      return rec;
    }
  }
  rec.details = "[pi,pi] = 0";
  return rec;
}

}  // namespace plm
