#include "plm/geom.hpp"

#include <algorithm>
#include <sstream>

namespace plm {

struct GeomOps {
  static void add(Multivector& v, std::vector<int> idx, const ScalarExpr& c) {
    v.add_term(std::move(idx), c);
  }
  static void add(DiffForm& w, std::vector<int> idx, const ScalarExpr& c) {
    w.add_term(std::move(idx), c);
  }
};

namespace {

// Merge two strictly increasing index tuples into one; the sign is the parity
// of the shuffle, and a shared index yields 0.
int merge_indices(const std::vector<int>& a, const std::vector<int>& b,
                  std::vector<int>& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  int sign = 1;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      if ((a.size() - i) % 2 == 1) sign = -sign;
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return sign;
}

void check_same_chart(ChartPtr a, ChartPtr b) {
  if (!same_chart(a, b)) throw DomainError("tensors live on different charts");
}

void check_indices(ChartPtr chart, const std::vector<int>& idx) {
  for (size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= chart->dim())
      throw DomainError("tensor index out of range");
    if (k > 0 && idx[k] <= idx[k - 1])
      throw DomainError("tensor indices must be strictly increasing");
  }
}

std::string render_terms(const std::map<std::vector<int>, ScalarExpr>& terms,
                         ChartPtr chart, const char* prefix) {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [idx, coeff] : terms) {
    if (!first) os << " + ";
    first = false;
    std::string c = coeff.str();
    if (idx.empty()) {
      os << c;
      continue;
    }
    if (!coeff.equals(expr_one(chart))) {
      bool wrap = c.find(' ') != std::string::npos;
      os << (wrap ? "(" : "") << c << (wrap ? ")" : "") << "*";
    }
    for (size_t k = 0; k < idx.size(); ++k) {
      if (k) os << "∧";
      os << prefix << chart->name(idx[k]);
    }
  }
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Multivector

Multivector Multivector::zero(ChartPtr chart, int degree) {
  // degrees above the chart dimension are allowed and hold no terms
  if (degree < 0) throw DomainError("multivector degree out of range");
  return Multivector(chart, degree);
}

Multivector Multivector::scalar(const ScalarExpr& f) {
  Multivector v(f.chart(), 0);
  if (!f.is_zero()) v.terms_.emplace(std::vector<int>{}, f);
  return v;
}

Multivector Multivector::term(const ScalarExpr& coeff,
                              std::vector<int> indices) {
  check_indices(coeff.chart(), indices);
  Multivector v(coeff.chart(), static_cast<int>(indices.size()));
  if (!coeff.is_zero()) v.terms_.emplace(std::move(indices), coeff);
  return v;
}

void Multivector::add_term(std::vector<int> idx, const ScalarExpr& coeff) {
  auto it = terms_.find(idx);
  if (it == terms_.end()) {
    if (!coeff.is_zero()) terms_.emplace(std::move(idx), coeff);
    return;
  }
  ScalarExpr s = it->second + coeff;
  if (s.is_zero())
    terms_.erase(it);
  else
    it->second = s;
}

ScalarExpr Multivector::component(const std::vector<int>& indices) const {
  std::vector<int> sorted = indices;
  int sign = 1;
  for (size_t i = 0; i < sorted.size(); ++i)  // insertion sort, track parity
    for (size_t j = i; j > 0 && sorted[j] < sorted[j - 1]; --j) {
      std::swap(sorted[j], sorted[j - 1]);
      sign = -sign;
    }
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1]) return expr_zero(chart_);
  auto it = terms_.find(sorted);
  if (it == terms_.end()) return expr_zero(chart_);
  return sign == 1 ? it->second : -it->second;
}

bool Multivector::equals(const Multivector& o) const {
  if (!same_chart(chart_, o.chart_) || degree_ != o.degree_) return false;
  if (terms_.size() != o.terms_.size()) return false;
  for (const auto& [idx, coeff] : terms_) {
    auto it = o.terms_.find(idx);
    if (it == o.terms_.end() || !coeff.equals(it->second)) return false;
  }
  return true;
}

Multivector Multivector::operator-() const {
  Multivector r(chart_, degree_);
  for (const auto& [idx, coeff] : terms_) r.terms_.emplace(idx, -coeff);
  return r;
}

Multivector operator+(const Multivector& a, const Multivector& b) {
  check_same_chart(a.chart(), b.chart());
  if (a.degree() != b.degree())
    throw DomainError("cannot add multivectors of different degree");
  Multivector r = a;
  for (const auto& [idx, coeff] : b.terms()) r.add_term(idx, coeff);
  return r;
}

Multivector operator-(const Multivector& a, const Multivector& b) {
  return a + (-b);
}

Multivector operator*(const ScalarExpr& f, const Multivector& v) {
  check_same_chart(f.chart(), v.chart());
  Multivector r = Multivector::zero(v.chart(), v.degree());
  if (f.is_zero()) return r;
  for (const auto& [idx, coeff] : v.terms()) r.add_term(idx, f * coeff);
  return r;
}

Multivector operator*(const Rational& c, const Multivector& v) {
  return ScalarExpr::constant(v.chart(), c) * v;
}

Multivector Multivector::transform_coeffs(
    const std::function<ScalarExpr(const ScalarExpr&)>& fn) const {
  Multivector r(chart_, degree_);
  for (const auto& [idx, coeff] : terms_) {
    ScalarExpr c = fn(coeff);
    if (!c.is_zero()) r.terms_.emplace(idx, c);
  }
  return r;
}

std::string Multivector::str() const {
  return render_terms(terms_, chart_, "∂");
}

// ---------------------------------------------------------------------------
// DiffForm

DiffForm DiffForm::zero(ChartPtr chart, int degree) {
  if (degree < 0) throw DomainError("form degree out of range");
  return DiffForm(chart, degree);
}

DiffForm DiffForm::scalar(const ScalarExpr& f) {
  DiffForm w(f.chart(), 0);
  if (!f.is_zero()) w.terms_.emplace(std::vector<int>{}, f);
  return w;
}

DiffForm DiffForm::term(const ScalarExpr& coeff, std::vector<int> indices) {
  check_indices(coeff.chart(), indices);
  DiffForm w(coeff.chart(), static_cast<int>(indices.size()));
  if (!coeff.is_zero()) w.terms_.emplace(std::move(indices), coeff);
  return w;
}

void DiffForm::add_term(std::vector<int> idx, const ScalarExpr& coeff) {
  auto it = terms_.find(idx);
  if (it == terms_.end()) {
    if (!coeff.is_zero()) terms_.emplace(std::move(idx), coeff);
    return;
  }
  ScalarExpr s = it->second + coeff;
  if (s.is_zero())
    terms_.erase(it);
  else
    it->second = s;
}

ScalarExpr DiffForm::component(const std::vector<int>& indices) const {
  std::vector<int> sorted = indices;
  int sign = 1;
  for (size_t i = 0; i < sorted.size(); ++i)
    for (size_t j = i; j > 0 && sorted[j] < sorted[j - 1]; --j) {
      std::swap(sorted[j], sorted[j - 1]);
      sign = -sign;
    }
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1]) return expr_zero(chart_);
  auto it = terms_.find(sorted);
  if (it == terms_.end()) return expr_zero(chart_);
  return sign == 1 ? it->second : -it->second;
}

bool DiffForm::equals(const DiffForm& o) const {
  if (!same_chart(chart_, o.chart_) || degree_ != o.degree_) return false;
  if (terms_.size() != o.terms_.size()) return false;
  for (const auto& [idx, coeff] : terms_) {
    auto it = o.terms_.find(idx);
    if (it == o.terms_.end() || !coeff.equals(it->second)) return false;
  }
  return true;
}

DiffForm DiffForm::operator-() const {
  DiffForm r(chart_, degree_);
  for (const auto& [idx, coeff] : terms_) r.terms_.emplace(idx, -coeff);
  return r;
}

DiffForm operator+(const DiffForm& a, const DiffForm& b) {
  check_same_chart(a.chart(), b.chart());
  if (a.degree() != b.degree())
    throw DomainError("cannot add forms of different degree");
  DiffForm r = a;
  for (const auto& [idx, coeff] : b.terms()) r.add_term(idx, coeff);
  return r;
}

DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

DiffForm operator*(const ScalarExpr& f, const DiffForm& w) {
  check_same_chart(f.chart(), w.chart());
  DiffForm r = DiffForm::zero(w.chart(), w.degree());
  if (f.is_zero()) return r;
  for (const auto& [idx, coeff] : w.terms()) r.add_term(idx, f * coeff);
  return r;
}

DiffForm operator*(const Rational& c, const DiffForm& w) {
  return ScalarExpr::constant(w.chart(), c) * w;
}

DiffForm DiffForm::transform_coeffs(
    const std::function<ScalarExpr(const ScalarExpr&)>& fn) const {
  DiffForm r(chart_, degree_);
  for (const auto& [idx, coeff] : terms_) {
    ScalarExpr c = fn(coeff);
    if (!c.is_zero()) r.terms_.emplace(idx, c);
  }
  return r;
}

std::string DiffForm::str() const { return render_terms(terms_, chart_, "d"); }

// ---------------------------------------------------------------------------
// wedge products

Multivector wedge(const Multivector& a, const Multivector& b) {
  check_same_chart(a.chart(), b.chart());
  Multivector r(a.chart(), a.degree() + b.degree());
  std::vector<int> merged;
  for (const auto& [ia, ca] : a.terms())
    for (const auto& [ib, cb] : b.terms()) {
      int sign = merge_indices(ia, ib, merged);
      if (sign == 0) continue;
      ScalarExpr c = ca * cb;
      r.add_term(merged, sign == 1 ? c : -c);
    }
  return r;
}

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  check_same_chart(a.chart(), b.chart());
  DiffForm r(a.chart(), a.degree() + b.degree());
  std::vector<int> merged;
  for (const auto& [ia, ca] : a.terms())
    for (const auto& [ib, cb] : b.terms()) {
      int sign = merge_indices(ia, ib, merged);
      if (sign == 0) continue;
      ScalarExpr c = ca * cb;
      r.add_term(merged, sign == 1 ? c : -c);
    }
  return r;
}

// ---------------------------------------------------------------------------
// exterior derivative and contractions

DiffForm d(const DiffForm& w) {
  ChartPtr chart = w.chart();
  DiffForm r = DiffForm::zero(chart, w.degree() + 1);
  std::vector<int> merged;
  for (const auto& [idx, coeff] : w.terms())
    for (int k = 0; k < chart->dim(); ++k) {
      ScalarExpr dk = coeff.differentiate(k);
      if (dk.is_zero()) continue;
      int sign = merge_indices({k}, idx, merged);
      if (sign == 0) continue;
      r.add_term(merged, sign == 1 ? dk : -dk);
    }
  return r;
}

DiffForm differential(const ScalarExpr& f) {
  return d(DiffForm::scalar(f));
}

Multivector interior(const DiffForm& alpha, const Multivector& v) {
  check_same_chart(alpha.chart(), v.chart());
  if (alpha.degree() != 1) throw DomainError("interior expects a 1-form");
  if (v.degree() == 0) return Multivector::zero(v.chart(), 0);
  Multivector r = Multivector::zero(v.chart(), v.degree() - 1);
  for (const auto& [idx, coeff] : v.terms())
    for (size_t k = 0; k < idx.size(); ++k) {
      ScalarExpr a = alpha.component({idx[k]});
      if (a.is_zero()) continue;
      std::vector<int> rest;
      rest.reserve(idx.size() - 1);
      for (size_t j = 0; j < idx.size(); ++j)
        if (j != k) rest.push_back(idx[j]);
      ScalarExpr c = a * coeff;
      r.add_term(std::move(rest), k % 2 == 0 ? c : -c);
    }
  return r;
}

DiffForm interior(const Multivector& x, const DiffForm& w) {
  check_same_chart(x.chart(), w.chart());
  if (x.degree() != 1) throw DomainError("interior expects a vector field");
  if (w.degree() == 0) return DiffForm::zero(w.chart(), 0);
  DiffForm r = DiffForm::zero(w.chart(), w.degree() - 1);
  for (const auto& [idx, coeff] : w.terms())
    for (size_t k = 0; k < idx.size(); ++k) {
      ScalarExpr a = x.component({idx[k]});
      if (a.is_zero()) continue;
      std::vector<int> rest;
      rest.reserve(idx.size() - 1);
      for (size_t j = 0; j < idx.size(); ++j)
        if (j != k) rest.push_back(idx[j]);
      ScalarExpr c = a * coeff;
      r.add_term(std::move(rest), k % 2 == 0 ? c : -c);
    }
  return r;
}

Multivector sharp(const Multivector& pi, const DiffForm& alpha) {
  if (pi.degree() != 2) throw DomainError("sharp expects a bivector");
  return interior(alpha, pi);
}

ScalarExpr pairing(const Multivector& pi, const DiffForm& alpha,
                   const DiffForm& beta) {
  Multivector v = sharp(pi, alpha);
  ScalarExpr s = expr_zero(pi.chart());
  for (const auto& [idx, coeff] : v.terms()) s = s + coeff * beta.component(idx);
  return s;
}

ScalarExpr poisson_bracket(const Multivector& pi, const ScalarExpr& f,
                           const ScalarExpr& g) {
  return pairing(pi, differential(f), differential(g));
}

// ---------------------------------------------------------------------------
// Schouten bracket

namespace {

// right derivative with respect to the odd symbol carrying index i: the term
// coeff * ∂_{I} maps to ±coeff * ∂_{I\i} with the sign counting the symbols
// the derivative moves across from the right
Multivector odd_partial(const Multivector& v, int i) {
  Multivector r = Multivector::zero(v.chart(), std::max(v.degree() - 1, 0));
  if (v.degree() == 0) return r;
  for (const auto& [idx, coeff] : v.terms()) {
    auto pos = std::find(idx.begin(), idx.end(), i);
    if (pos == idx.end()) continue;
    size_t k = static_cast<size_t>(pos - idx.begin());
    std::vector<int> rest;
    rest.reserve(idx.size() - 1);
    for (size_t j = 0; j < idx.size(); ++j)
      if (j != k) rest.push_back(idx[j]);
    bool flip = (idx.size() - 1 - k) % 2 == 1;
    GeomOps::add(r, std::move(rest), flip ? -coeff : coeff);
  }
  return r;
}

Multivector coeff_partial(const Multivector& v, int i) {
  return v.transform_coeffs(
      [i](const ScalarExpr& c) { return c.differentiate(i); });
}

}  // namespace

Multivector schouten(const Multivector& a, const Multivector& b) {
  check_same_chart(a.chart(), b.chart());
  ChartPtr chart = a.chart();
  int p = a.degree(), q = b.degree();
  Multivector r = Multivector::zero(chart, std::max(p + q - 1, 0));
  bool flip = ((p - 1) * (q - 1)) % 2 == 1;
  for (int i = 0; i < chart->dim(); ++i) {
    Multivector t1 = wedge(odd_partial(a, i), coeff_partial(b, i));
    Multivector t2 = wedge(odd_partial(b, i), coeff_partial(a, i));
    // a zero derivative can carry a shifted degree tag; only add live terms
    if (!t1.is_zero()) r = r + t1;
    if (!t2.is_zero()) r = r + (flip ? t2 : -t2);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lie derivatives and the Koszul bracket

DiffForm lie(const Multivector& x, const DiffForm& w) {
  if (x.degree() != 1) throw DomainError("lie expects a vector field");
  if (w.degree() == 0) return interior(x, d(w));
  return interior(x, d(w)) + d(interior(x, w));
}

Multivector lie(const Multivector& x, const Multivector& v) {
  if (x.degree() != 1) throw DomainError("lie expects a vector field");
  return schouten(x, v);
}

DiffForm cotangent_bracket(const Multivector& pi, const DiffForm& alpha,
                           const DiffForm& beta) {
  if (alpha.degree() != 1 || beta.degree() != 1)
    throw DomainError("cotangent bracket expects 1-forms");
  return lie(sharp(pi, alpha), beta) - lie(sharp(pi, beta), alpha) -
         differential(pairing(pi, alpha, beta));
}

// ---------------------------------------------------------------------------
// SmoothMap

SmoothMap::SmoothMap(ChartPtr source, ChartPtr target,
                     std::vector<ScalarExpr> components)
    : source_(source), target_(target), comps_(std::move(components)) {
  if (static_cast<int>(comps_.size()) != target_->dim())
    throw DomainError("smooth map needs one component per target variable");
  for (const auto& c : comps_) check_same_chart(c.chart(), source_);
}

SmoothMap SmoothMap::identity(ChartPtr chart) {
  std::vector<ScalarExpr> comps;
  for (int i = 0; i < chart->dim(); ++i)
    comps.push_back(ScalarExpr::variable(chart, i));
  return SmoothMap(chart, chart, std::move(comps));
}

ScalarExpr SmoothMap::apply(const ScalarExpr& f) const {
  check_same_chart(f.chart(), target_);
  return f.substitute(comps_, source_);
}

std::vector<double> SmoothMap::eval(std::span<const double> point) const {
  std::vector<double> out;
  out.reserve(comps_.size());
  for (const auto& c : comps_) out.push_back(c.eval(point));
  return out;
}

DiffForm SmoothMap::pullback(const DiffForm& w) const {
  check_same_chart(w.chart(), target_);
  std::vector<DiffForm> dcomp;
  dcomp.reserve(comps_.size());
  for (const auto& c : comps_) dcomp.push_back(differential(c));
  DiffForm r = DiffForm::zero(source_, w.degree());
  for (const auto& [idx, coeff] : w.terms()) {
    DiffForm part = DiffForm::scalar(apply(coeff));
    for (int i : idx) part = wedge(part, dcomp[i]);
    r = r + part;
  }
  return r;
}

SmoothMap SmoothMap::then(const SmoothMap& g) const {
  check_same_chart(target_, g.source_);
  std::vector<ScalarExpr> comps;
  comps.reserve(g.comps_.size());
  for (const auto& c : g.comps_) comps.push_back(c.substitute(comps_, source_));
  return SmoothMap(source_, g.target_, std::move(comps));
}

}  // namespace plm
